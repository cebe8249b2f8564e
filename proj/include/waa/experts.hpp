#pragma once

// Enumerable families of stationary prediction strategies.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "waa/core.hpp"

namespace waa {

struct SpaceDims {
  std::size_t signal = 1;
  std::size_t observation = 1;
  std::size_t prediction = 1;

  friend bool operator==(const SpaceDims&, const SpaceDims&) = default;
};

enum class StrategyFamily { constant, linear_memory, nearest_centroid };

std::string_view to_string(StrategyFamily family);

/// A prediction rule that reads only the current signal and the last
/// `memory_depth` observations; it never sees the round index.
///
/// Parameter layouts:
///   constant          gamma (prediction dims)
///   linear_memory     prediction-dims rows of [bias, y_{n-1}, ..., y_{n-m}, x_n], row-major
///   nearest_centroid  records of (anchor in X, value in Gamma); the value of the
///                     anchor nearest to x_n is returned, ties to the lowest record
struct StationaryStrategy {
  StrategyFamily family = StrategyFamily::constant;
  std::vector<double> params;
  std::size_t memory_depth = 0;
  SpaceDims dims;

  friend bool operator==(const StationaryStrategy&, const StationaryStrategy&) = default;
};

StationaryStrategy constant_strategy(const Point& value, SpaceDims dims);
StationaryStrategy linear_strategy(std::size_t memory_depth, std::vector<double> params, SpaceDims dims);
StationaryStrategy centroid_strategy(std::vector<double> params, SpaceDims dims);

/// Number of parameters a strategy of this family and depth carries.
std::size_t parameter_count(StrategyFamily family, std::size_t memory_depth, SpaceDims dims,
                            std::size_t centroid_count);

Point strategy_predict(const StationaryStrategy& d, const History& h);

// ---------------------------------------------------------------------------

/// Dyadic grid on one axis: level l holds origin + half_width * i / 2^l for
/// |i| <= 2^l. Level 0 is {origin, origin - half_width, origin + half_width}.
struct GridAxis {
  double origin = 0.0;
  double half_width = 1.0;
};

struct EnumConfig {
  SpaceDims dims;
  bool constant = true;
  bool linear_memory = true;
  bool nearest_centroid = true;
  std::size_t min_memory = 0;
  std::size_t max_memory = 1;
  std::size_t centroid_count = 2;
  /// Highest grid level any family is enumerated to.
  std::size_t max_level = 40;
  GridAxis output{0.5, 0.5};
  GridAxis coefficient{0.0, 1.0};
  GridAxis anchor{0.0, 1.0};
};

/// One (family, memory depth, level) block of the diagonal enumeration.
struct EnumCell {
  StrategyFamily family;
  std::size_t memory_depth;
  std::size_t level;
  std::uint64_t size;  // strategies first appearing at this level
};

/// The cells of shell s, in enumeration order. Shell s holds constant and
/// nearest-centroid strategies of level s and linear strategies of depth m at
/// level s - (m - min_memory).
std::vector<EnumCell> enumeration_shell(const EnumConfig& config, std::size_t shell);

/// Index one past the last strategy of shell s (indices are 1-based).
std::uint64_t shell_end_index(const EnumConfig& config, std::size_t shell);

/// The index-th strategy (index >= 1). Deterministic; pairwise distinct.
StationaryStrategy enumerate_strategy(std::uint64_t index, const EnumConfig& config);

// ---------------------------------------------------------------------------

/// q_k proportional to 2^{-k}, renormalized over the first `size` experts.
std::vector<double> geometric_priors(std::size_t size);
std::vector<double> uniform_priors(std::size_t size);

/// Throws unless priors are positive and sum to 1 within 1e-12.
void validate_priors(std::span<const double> priors);

struct ExpertPool {
  std::vector<StationaryStrategy> experts;
  std::vector<double> priors;

  ExpertPool() = default;
  ExpertPool(std::vector<StationaryStrategy> e, std::vector<double> q);

  std::size_t size() const { return experts.size(); }
};

/// The first `size` enumerated strategies with geometric priors.
ExpertPool enumerate_pool(const EnumConfig& config, std::size_t size);

// ---------------------------------------------------------------------------

struct TranscriptEntry {
  History history;
  Point observation;
};
using Transcript = std::vector<TranscriptEntry>;

/// Sum over the transcript of lambda(predict(sigma_n), y_n), in round order.
template <class Predictor>
double replay_cumulative_loss(const Predictor& predict, std::span<const TranscriptEntry> transcript,
                              const LossFunction& loss) {
  double total = 0.0;
  for (const auto& round : transcript) total += loss_eval(loss, predict(round.history), round.observation);
  return total;
}

double replay_cumulative_loss(const StationaryStrategy& d, std::span<const TranscriptEntry> transcript,
                              const LossFunction& loss);

}  // namespace waa
