#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace distseq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// 0/1 per coordinate; 1 marks an active (kept) coefficient.
using Indicator = Eigen::VectorXi;

// Engine with a standard-defined output sequence. Distributions come from
// Boost.Random so draws are identical across standard libraries.
using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0);

class RankDeficient : public std::runtime_error {
 public:
  explicit RankDeficient(const std::string& what) : std::runtime_error("rank-deficient: " + what) {}
};

class UndefinedVariance : public std::runtime_error {
 public:
  explicit UndefinedVariance(const std::string& what)
      : std::runtime_error("undefined variance: " + what) {}
};

class SetupError : public std::runtime_error {
 public:
  explicit SetupError(const std::string& what) : std::runtime_error("setup error: " + what) {}
};

}  // namespace distseq
