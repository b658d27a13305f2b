/**
 * @file alignment.hpp
 * @brief Governing-process estimation by alternating least squares over integer day offsets.
 *
 * Station i is compared with the governing process G after advancing it by phi_i days:
 * term (x_i(t + phi_i) - G(t))^2 for t = 1..T - phi_i. Offsets are bounded to 0..365.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "streamgov/types.hpp"

namespace streamgov::alignment {

inline constexpr std::size_t kMaxOffset = 365;

/**
 * @brief Per-station weighting of the truncated squared error.
 *
 * Normalized divides each station's error by its number of terms T - phi_i, so large shifts
 * are not favoured merely for summing fewer terms. Raw is the plain double sum.
 */
enum class LossMode { Normalized, Raw };

struct AlignmentOptions {
  std::size_t max_iters{50};
  double tol{1e-8};  ///< relative loss decrease below which iteration stops
  LossMode mode{LossMode::Normalized};
};

struct GoverningProcess {
  std::vector<double> g;
  std::vector<std::size_t> offsets;
  std::vector<double> loss_history;  ///< objective of `mode` after each (offsets, g) update pair
  std::size_t iterations{0};
  bool converged{false};
};

/// Largest admissible offset for series of the given length: min(365, T - 1).
[[nodiscard]] std::size_t max_offset(std::size_t days) noexcept;

/// Literal double sum over stations of the truncated squared error (raw mode objective).
double alignment_loss(const Collection& collection, std::span<const double> g, std::span<const std::size_t> offsets);

/// Objective minimized by the alternating updates under `mode`.
double alignment_objective(const Collection& collection, std::span<const double> g,
                           std::span<const std::size_t> offsets, LossMode mode);

/// Independent per-station argmin over 0..max_offset(T); ties go to the smallest offset.
std::vector<std::size_t> update_offsets(const Collection& collection, std::span<const double> g,
                                        LossMode mode = LossMode::Normalized);

/**
 * @brief Pointwise minimizer of the objective in g for fixed offsets.
 *
 * g(t) is the mean of x_i(t + phi_i) over the stations that reach t. Raw mode uses equal
 * weights; normalized mode weights station i by 1 / (T - phi_i), which coincides with the
 * plain mean whenever the offsets are equal. Positions no station reaches (only possible
 * when T <= 365) are set to 0.
 */
std::vector<double> update_governing(const Collection& collection, std::span<const std::size_t> offsets,
                                     LossMode mode = LossMode::Normalized);

/**
 * @brief Alternating minimization from the unshifted collection mean.
 *
 * Stops when the offsets repeat, when the objective falls by less than `tol` relative to the
 * previous value, or after `max_iters` update pairs. Before stopping, stations that would fit
 * better with a negative offset trigger one extra pair started from g advanced by the largest
 * such shift; it is kept, and iteration resumes, only if it lowers the objective.
 */
GoverningProcess estimate_governing_process(const Collection& collection, const AlignmentOptions& options = {});

struct StateOffsets {
  State state{};
  std::size_t stations{0};
  std::size_t nonzero{0};
  double percent_nonzero{0.0};           ///< 100 * nonzero / stations
  std::optional<double> median_nonzero;  ///< absent when nonzero == 0
};

/// One row per state that has at least one station, in State enum order.
struct OffsetSummary {
  std::vector<StateOffsets> rows;
};

OffsetSummary summarize_offsets(const GoverningProcess& process, const Collection& collection);

}  // namespace streamgov::alignment
