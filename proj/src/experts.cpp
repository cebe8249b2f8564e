#include "waa/experts.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace waa {

std::string_view to_string(StrategyFamily family) {
  switch (family) {
    case StrategyFamily::constant: return "constant";
    case StrategyFamily::linear_memory: return "linear_memory";
    case StrategyFamily::nearest_centroid: return "nearest_centroid";
  }
  return "constant";
}

std::size_t parameter_count(StrategyFamily family, std::size_t memory_depth, SpaceDims dims,
                            std::size_t centroid_count) {
  switch (family) {
    case StrategyFamily::constant: return dims.prediction;
    case StrategyFamily::linear_memory:
      return dims.prediction * (1 + memory_depth * dims.observation + dims.signal);
    case StrategyFamily::nearest_centroid: return centroid_count * (dims.signal + dims.prediction);
  }
  return 0;
}

StationaryStrategy constant_strategy(const Point& value, SpaceDims dims) {
  if (value.dim() != dims.prediction) throw std::invalid_argument("constant_strategy: dimension mismatch");
  return {StrategyFamily::constant, std::vector<double>(value.coords().begin(), value.coords().end()), 0, dims};
}

StationaryStrategy linear_strategy(std::size_t memory_depth, std::vector<double> params, SpaceDims dims) {
  if (params.size() != parameter_count(StrategyFamily::linear_memory, memory_depth, dims, 0))
    throw std::invalid_argument("linear_strategy: wrong parameter count");
  return {StrategyFamily::linear_memory, std::move(params), memory_depth, dims};
}

StationaryStrategy centroid_strategy(std::vector<double> params, SpaceDims dims) {
  const std::size_t record = dims.signal + dims.prediction;
  if (params.empty() || params.size() % record != 0)
    throw std::invalid_argument("centroid_strategy: parameters must be whole (anchor, value) records");
  return {StrategyFamily::nearest_centroid, std::move(params), 0, dims};
}

Point strategy_predict(const StationaryStrategy& d, const History& h) {
  const SpaceDims& dims = d.dims;
  if (h.current_signal().dim() != dims.signal) throw std::invalid_argument("strategy_predict: signal dimension mismatch");

  switch (d.family) {
    case StrategyFamily::constant: return Point(d.params);

    case StrategyFamily::linear_memory: {
      const std::size_t width = 1 + d.memory_depth * dims.observation + dims.signal;
      std::vector<double> out(dims.prediction);
      for (std::size_t row = 0; row < dims.prediction; ++row) {
        const double* w = d.params.data() + row * width;
        double acc = w[0];
        std::size_t col = 1;
        for (std::size_t lag = 1; lag <= d.memory_depth; ++lag) {
          const Point* y = h.observation_back(lag);
          for (std::size_t i = 0; i < dims.observation; ++i, ++col) {
            // Prepast observations read as zero.
            if (y != nullptr) acc += w[col] * (*y)[i];
          }
        }
        for (std::size_t i = 0; i < dims.signal; ++i, ++col) acc += w[col] * h.current_signal()[i];
        out[row] = acc;
      }
      return Point(std::move(out));
    }

    case StrategyFamily::nearest_centroid: {
      const std::size_t record = dims.signal + dims.prediction;
      const std::size_t count = d.params.size() / record;
      std::size_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < count; ++c) {
        double dist = 0.0;
        for (std::size_t i = 0; i < dims.signal; ++i) {
          const double diff = d.params[c * record + i] - h.current_signal()[i];
          dist += diff * diff;
        }
        if (dist < best_dist) {
          best_dist = dist;
          best = c;
        }
      }
      const auto first = d.params.begin() + static_cast<std::ptrdiff_t>(best * record + dims.signal);
      return Point(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(dims.prediction)));
    }
  }
  throw std::logic_error("strategy_predict: unknown family");
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kSaturated = std::uint64_t{1} << 62;

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a >= kSaturated || b >= kSaturated || a > kSaturated / b) return kSaturated;
  return a * b;
}

std::uint64_t sat_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r = sat_mul(r, base);
  return r;
}

// Grid ranks at level l run over 0..2^{l+1}; rank r maps to index 0, -1, +1, -2, +2, ...
std::int64_t zigzag(std::uint64_t rank) {
  if (rank == 0) return 0;
  return rank % 2 == 1 ? -static_cast<std::int64_t>((rank + 1) / 2) : static_cast<std::int64_t>(rank / 2);
}

std::uint64_t axis_size(std::size_t level) { return (std::uint64_t{1} << (level + 1)) + 1; }
std::uint64_t even_count(std::size_t level) { return (std::uint64_t{1} << level) + 1; }

std::uint64_t completions(std::size_t level, std::size_t remaining, bool has_odd) {
  const std::uint64_t all = sat_pow(axis_size(level), remaining);
  if (level == 0 || has_odd) return all;
  if (all >= kSaturated) return kSaturated;
  return all - sat_pow(even_count(level), remaining);
}

std::uint64_t cell_size(std::size_t level, std::size_t params) { return completions(level, params, false); }

const GridAxis& axis_for(const EnumConfig& config, StrategyFamily family, std::size_t memory_depth,
                         std::size_t param) {
  const SpaceDims& dims = config.dims;
  switch (family) {
    case StrategyFamily::constant: return config.output;
    case StrategyFamily::linear_memory: {
      const std::size_t width = 1 + memory_depth * dims.observation + dims.signal;
      return param % width == 0 ? config.output : config.coefficient;
    }
    case StrategyFamily::nearest_centroid: {
      const std::size_t record = dims.signal + dims.prediction;
      return param % record < dims.signal ? config.anchor : config.output;
    }
  }
  return config.output;
}

std::size_t params_of(const EnumConfig& config, StrategyFamily family, std::size_t memory_depth) {
  return parameter_count(family, memory_depth, config.dims, config.centroid_count);
}

StationaryStrategy unrank(const EnumConfig& config, const EnumCell& cell, std::uint64_t offset) {
  const std::size_t count = params_of(config, cell.family, cell.memory_depth);
  const std::uint64_t ranks = axis_size(cell.level);
  std::vector<double> params(count);
  bool has_odd = false;
  for (std::size_t pos = 0; pos < count; ++pos) {
    const std::size_t remaining = count - pos - 1;
    std::uint64_t r = 0;
    for (; r < ranks; ++r) {
      const bool odd = (zigzag(r) % 2) != 0;
      const std::uint64_t n = completions(cell.level, remaining, has_odd || odd);
      if (offset < n) break;
      offset -= n;
    }
    if (r == ranks) throw std::logic_error("unrank: offset beyond cell");
    const std::int64_t i = zigzag(r);
    has_odd = has_odd || (i % 2 != 0);
    const GridAxis& axis = axis_for(config, cell.family, cell.memory_depth, pos);
    params[pos] = axis.origin + axis.half_width * std::ldexp(static_cast<double>(i), -static_cast<int>(cell.level));
  }
  return {cell.family, std::move(params), cell.memory_depth, config.dims};
}

void validate_config(const EnumConfig& config) {
  if (!config.constant && !config.linear_memory && !config.nearest_centroid)
    throw std::invalid_argument("EnumConfig: no family enabled");
  if (config.min_memory > config.max_memory) throw std::invalid_argument("EnumConfig: min_memory > max_memory");
  if (config.centroid_count == 0) throw std::invalid_argument("EnumConfig: centroid_count must be positive");
  for (const GridAxis* a : {&config.output, &config.coefficient, &config.anchor}) {
    if (!(a->half_width > 0.0)) throw std::invalid_argument("EnumConfig: grid half-width must be positive");
  }
  if (config.max_level > 60) throw std::invalid_argument("EnumConfig: max_level too large");
}

}  // namespace

std::vector<EnumCell> enumeration_shell(const EnumConfig& config, std::size_t shell) {
  std::vector<EnumCell> cells;
  auto add = [&](StrategyFamily f, std::size_t m, std::size_t level) {
    if (level > config.max_level) return;
    cells.push_back({f, m, level, cell_size(level, params_of(config, f, m))});
  };
  if (config.constant) add(StrategyFamily::constant, 0, shell);
  if (config.linear_memory) {
    for (std::size_t m = config.min_memory; m <= config.max_memory; ++m) {
      const std::size_t lag = m - config.min_memory;
      if (shell >= lag) add(StrategyFamily::linear_memory, m, shell - lag);
    }
  }
  if (config.nearest_centroid) add(StrategyFamily::nearest_centroid, 0, shell);
  return cells;
}

std::uint64_t shell_end_index(const EnumConfig& config, std::size_t shell) {
  validate_config(config);
  std::uint64_t end = 1;
  for (std::size_t s = 0; s <= shell; ++s)
    for (const auto& cell : enumeration_shell(config, s)) end = std::min(kSaturated, end + cell.size);
  return end;
}

StationaryStrategy enumerate_strategy(std::uint64_t index, const EnumConfig& config) {
  if (index == 0) throw std::invalid_argument("enumerate_strategy: index starts at 1");
  validate_config(config);
  std::uint64_t offset = index - 1;
  const std::size_t last_shell = config.max_level + (config.max_memory - config.min_memory);
  for (std::size_t s = 0; s <= last_shell; ++s) {
    for (const auto& cell : enumeration_shell(config, s)) {
      if (offset < cell.size) return unrank(config, cell, offset);
      offset -= cell.size;
    }
  }
  throw std::out_of_range("enumerate_strategy: index beyond the configured grid levels");
}

// ---------------------------------------------------------------------------

std::vector<double> geometric_priors(std::size_t size) {
  if (size == 0) throw std::invalid_argument("geometric_priors: empty pool");
  std::vector<double> q(size);
  double total = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    q[k] = std::ldexp(1.0, -static_cast<int>(k + 1));
    total += q[k];
  }
  for (double& v : q) v /= total;
  return q;
}

std::vector<double> uniform_priors(std::size_t size) {
  if (size == 0) throw std::invalid_argument("uniform_priors: empty pool");
  return std::vector<double>(size, 1.0 / static_cast<double>(size));
}

void validate_priors(std::span<const double> priors) {
  if (priors.empty()) throw std::invalid_argument("priors: empty");
  double total = 0.0;
  for (double q : priors) {
    if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("priors: every q_k must be positive");
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "priors: sum " << total << " is not 1";
    throw std::invalid_argument(os.str());
  }
}

ExpertPool::ExpertPool(std::vector<StationaryStrategy> e, std::vector<double> q)
    : experts(std::move(e)), priors(std::move(q)) {
  if (experts.size() != priors.size()) throw std::invalid_argument("ExpertPool: experts/priors length mismatch");
  validate_priors(priors);
}

ExpertPool enumerate_pool(const EnumConfig& config, std::size_t size) {
  std::vector<StationaryStrategy> experts;
  experts.reserve(size);
  for (std::size_t k = 1; k <= size; ++k) experts.push_back(enumerate_strategy(k, config));
  return ExpertPool(std::move(experts), geometric_priors(size));
}

double replay_cumulative_loss(const StationaryStrategy& d, std::span<const TranscriptEntry> transcript,
                              const LossFunction& loss) {
  return replay_cumulative_loss([&d](const History& h) { return strategy_predict(d, h); }, transcript, loss);
}

}  // namespace waa
