#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace evprice {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecI = Eigen::VectorXi;
using Point = Eigen::Vector2d;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class ChargerLevel { L2, L3 };

// splitmix64 finaliser; used to derive independent stream seeds from a base
// seed and a tuple of counters so that no two consumers share RNG state.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename... Rest>
constexpr std::uint64_t mix_seed(std::uint64_t x, std::uint64_t y, Rest... rest)
{
  return mix_seed(mix_seed(x) ^ (y * 0xd1342543de82ef95ULL), rest...);
}

}  // namespace evprice
