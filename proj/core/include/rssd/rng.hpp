#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace rssd {

using Rng = std::mt19937_64;

// Named sub-streams; a trial draws its instance and its initial point from
// independent generators so either can be regenerated alone.
enum class Stream : std::uint64_t {
  kInstance = 0x1,
  kInitialPoint = 0x2,
};

std::uint64_t SplitMix64(std::uint64_t x);

// Pure function of (base, path): the seed for a generator at a given position
// in the experiment tree, independent of execution order.
std::uint64_t DeriveSeed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

Rng MakeRng(std::uint64_t seed);

Eigen::MatrixXd GaussianMatrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Eigen::MatrixXd UniformMatrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace rssd
