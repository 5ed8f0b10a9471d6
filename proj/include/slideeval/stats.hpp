#pragma once

#include <optional>
#include <span>
#include <vector>

namespace slideeval {

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> xs);

/// Pearson correlation; nullopt when either side has zero variance or n < 2.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b (tie-corrected); nullopt when either side is constant or n < 2.
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

}  // namespace slideeval
