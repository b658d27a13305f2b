#include "streamgov/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "streamgov/parallel.hpp"

namespace streamgov::alignment {
namespace {

double shifted_sse(std::span<const double> x, std::span<const double> g, std::size_t offset) {
  const std::size_t terms = x.size() - offset;
  double sum = 0.0;
  for (std::size_t t = 0; t < terms; ++t) {
    const double r = x[t + offset] - g[t];
    sum += r * r;
  }
  return sum;
}

double station_weight(std::size_t days, std::size_t offset, LossMode mode) {
  return mode == LossMode::Normalized ? 1.0 / static_cast<double>(days - offset) : 1.0;
}

void check_inputs(const Collection& collection, std::span<const double> g, std::span<const std::size_t> offsets) {
  if (g.size() != collection.days()) throw std::invalid_argument("governing process length differs from T");
  if (offsets.size() != collection.size()) throw std::invalid_argument("one offset per station required");
  const std::size_t bound = max_offset(collection.days());
  for (auto phi : offsets) {
    if (phi > bound) throw std::invalid_argument("offset out of range");
  }
}

/// Largest s such that some station fits g better advanced by s days than at any offset in
/// 0..bound, i.e. x_i(t) ~ g(t + s). Zero when every station is best served by a valid offset.
std::size_t frame_shift(const Collection& collection, std::span<const double> g, LossMode mode) {
  const std::size_t days = collection.days();
  const std::size_t bound = max_offset(days);
  std::vector<std::size_t> wanted(collection.size(), 0);
  parallel_for(collection.size(), [&](std::size_t i) {
    const auto x = collection.flow(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t phi = 0; phi <= bound; ++phi) best = std::min(best, station_weight(days, phi, mode) * shifted_sse(x, g, phi));
    for (std::size_t s = 1; s <= bound; ++s) {
      const double loss = station_weight(days, s, mode) * shifted_sse(g, x, s);
      if (loss < best) {
        best = loss;
        wanted[i] = s;
      }
    }
  });
  return *std::max_element(wanted.begin(), wanted.end());
}

}  // namespace

std::size_t max_offset(std::size_t days) noexcept {
  return days == 0 ? 0 : std::min(kMaxOffset, days - 1);
}

double alignment_loss(const Collection& collection, std::span<const double> g, std::span<const std::size_t> offsets) {
  return alignment_objective(collection, g, offsets, LossMode::Raw);
}

double alignment_objective(const Collection& collection, std::span<const double> g,
                           std::span<const std::size_t> offsets, LossMode mode) {
  check_inputs(collection, g, offsets);
  double total = 0.0;
  for (std::size_t i = 0; i < collection.size(); ++i) {
    total += station_weight(collection.days(), offsets[i], mode) * shifted_sse(collection.flow(i), g, offsets[i]);
  }
  return total;
}

std::vector<std::size_t> update_offsets(const Collection& collection, std::span<const double> g, LossMode mode) {
  if (g.size() != collection.days()) throw std::invalid_argument("governing process length differs from T");
  const std::size_t days = collection.days();
  const std::size_t bound = max_offset(days);
  std::vector<std::size_t> out(collection.size(), 0);
  parallel_for(collection.size(), [&](std::size_t i) {
    const auto x = collection.flow(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t phi = 0; phi <= bound; ++phi) {
      const double loss = station_weight(days, phi, mode) * shifted_sse(x, g, phi);
      if (loss < best) {
        best = loss;
        out[i] = phi;
      }
    }
  });
  return out;
}

std::vector<double> update_governing(const Collection& collection, std::span<const std::size_t> offsets,
                                     LossMode mode) {
  const std::size_t days = collection.days();
  if (offsets.size() != collection.size()) throw std::invalid_argument("one offset per station required");
  const std::size_t bound = max_offset(days);
  std::vector<double> weight(collection.size());
  for (std::size_t i = 0; i < collection.size(); ++i) {
    if (offsets[i] > bound) throw std::invalid_argument("offset out of range");
    weight[i] = station_weight(days, offsets[i], mode);
  }

  std::vector<double> g(days, 0.0);
  constexpr std::size_t kBlock = 1024;
  const std::size_t blocks = (days + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t begin = b * kBlock, end = std::min(days, begin + kBlock);
    for (std::size_t t = begin; t < end; ++t) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < collection.size(); ++i) {
        if (t + offsets[i] >= days) continue;
        num += weight[i] * collection.flow(i)[t + offsets[i]];
        den += weight[i];
      }
      g[t] = den > 0.0 ? num / den : 0.0;
    }
  });
  return g;
}

GoverningProcess estimate_governing_process(const Collection& collection, const AlignmentOptions& options) {
  if (options.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  const std::size_t n = collection.size();

  GoverningProcess out;
  out.offsets.assign(n, 0);
  out.g.assign(collection.days(), 0.0);
  for (std::size_t t = 0; t < collection.days(); ++t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += collection.flow(i)[t];
    out.g[t] = sum / static_cast<double>(n);
  }

  double previous = alignment_objective(collection, out.g, out.offsets, options.mode);
  while (out.iterations < options.max_iters) {
    auto offsets = update_offsets(collection, out.g, options.mode);
    const bool unchanged = offsets == out.offsets;
    out.offsets = std::move(offsets);
    out.g = update_governing(collection, out.offsets, options.mode);
    const double loss = alignment_objective(collection, out.g, out.offsets, options.mode);
    out.loss_history.push_back(loss);
    ++out.iterations;

    const bool small_step = previous <= 0.0 || (previous - loss) / previous < options.tol;
    previous = loss;
    if (!unchanged && !small_step) continue;

    // Offsets are non-negative, so a fixed point whose frame is later than some station is a
    // local minimum. Advance g to that station's frame and keep the move only if it pays.
    const std::size_t shift = out.iterations < options.max_iters ? frame_shift(collection, out.g, options.mode) : 0;
    if (shift > 0) {
      std::vector<double> advanced(out.g.size());
      for (std::size_t t = 0; t < advanced.size(); ++t) advanced[t] = out.g[std::min(t + shift, out.g.size() - 1)];
      auto cand_offsets = update_offsets(collection, advanced, options.mode);
      auto cand_g = update_governing(collection, cand_offsets, options.mode);
      const double cand_loss = alignment_objective(collection, cand_g, cand_offsets, options.mode);
      if (cand_loss < loss) {
        out.offsets = std::move(cand_offsets);
        out.g = std::move(cand_g);
        out.loss_history.push_back(cand_loss);
        ++out.iterations;
        previous = cand_loss;
        continue;
      }
    }
    out.converged = true;
    break;
  }
  return out;
}

OffsetSummary summarize_offsets(const GoverningProcess& process, const Collection& collection) {
  if (process.offsets.size() != collection.size()) throw std::invalid_argument("one offset per station required");
  std::vector<std::vector<std::size_t>> nonzero(kStateCount);
  std::vector<std::size_t> counts(kStateCount, 0);
  for (std::size_t i = 0; i < collection.size(); ++i) {
    const auto s = static_cast<std::size_t>(collection[i].meta.state);
    ++counts[s];
    if (process.offsets[i] != 0) nonzero[s].push_back(process.offsets[i]);
  }

  OffsetSummary out;
  for (std::size_t s = 0; s < kStateCount; ++s) {
    if (counts[s] == 0) continue;
    StateOffsets row;
    row.state = static_cast<State>(s);
    row.stations = counts[s];
    row.nonzero = nonzero[s].size();
    row.percent_nonzero = 100.0 * static_cast<double>(row.nonzero) / static_cast<double>(row.stations);
    auto& v = nonzero[s];
    if (!v.empty()) {
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size();
      row.median_nonzero = m % 2 == 1 ? static_cast<double>(v[m / 2])
                                      : 0.5 * static_cast<double>(v[m / 2 - 1] + v[m / 2]);
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace streamgov::alignment
