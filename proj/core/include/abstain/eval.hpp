#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "abstain/core.hpp"
#include "abstain/models.hpp"
#include "abstain/train.hpp"

namespace abstain::eval {

struct PCPoint {
  std::optional<double> precision;  // empty when nothing is accepted
  double coverage = 0.0;
  std::size_t n_accepted = 0;
  std::size_t n = 0;
};

/// Accept iff r > 0. Throws ValidationError on length mismatch or empty input.
PCPoint precision_coverage(std::span<const double> r_values, std::span<const int> annotations);

/// Threshold theta among the distinct scores (accept iff score > theta) with
/// precision >= target and maximal coverage; coverage ties go to the smaller
/// theta. Empty if no candidate reaches the target.
std::optional<double> fit_threshold(std::span<const double> scores,
                                    std::span<const int> annotations, double target_precision);

/// min(1, b / p): the largest coverage any rejector can reach at precision p
/// when a fraction b of examples is positive.
double theoretical_limit(double positive_rate, double target_precision);

enum class Method { kMaxProb, kCrossEntropy, kSurrogate };
std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct SweepOptions {
  double alpha = 4.0;  // surrogate only; beta follows the constraint
  RejectorSpec model{};
  std::uint64_t seed = 0;  // rejector initialization
  /// cross_entropy: fit the threshold on one half of the held-out fold and
  /// evaluate on the other half instead of fitting on the training split.
  bool half_validation = false;
  unsigned threads = 1;
};

/// One (grid entry, fold) evaluation.
struct SweepCell {
  std::size_t grid_index = 0;
  std::size_t fold = 0;
  double config = 0.0;
  std::optional<double> threshold;  // fitted threshold; empty for surrogate or infeasible fits
  PCPoint train;                    // on the data the rejector/threshold was fitted on
  PCPoint test;
};

struct CurveRow {
  std::string method;
  double config = 0.0;
  double precision_mean = 0.0;  // NaN when no fold accepted anything
  double precision_std = 0.0;
  double coverage_mean = 0.0;
  double coverage_std = 0.0;
  std::size_t folds = 0;
};

/// Grid entries are costs c for surrogate and target precisions otherwise.
/// Cells are ordered by (grid index, fold).
std::vector<SweepCell> sweep_cells(const Dataset& dataset, Method method,
                                   std::span<const double> grid, const Folds& folds,
                                   const TrainConfig& base_cfg, const SweepOptions& options = {});

/// Mean and population standard deviation over folds, per grid entry.
std::vector<CurveRow> aggregate(Method method, std::span<const SweepCell> cells,
                                std::size_t grid_size);

std::vector<CurveRow> sweep(const Dataset& dataset, Method method, std::span<const double> grid,
                            const Folds& folds, const TrainConfig& base_cfg,
                            const SweepOptions& options = {});

inline constexpr std::string_view kCurveHeader =
    "method,config,precision_mean,precision_std,coverage_mean,coverage_std,folds";

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows);
std::vector<CurveRow> read_curve_csv(std::istream& in);
void export_curve(std::span<const CurveRow> rows, const std::filesystem::path& path);

nlohmann::json curve_to_json(std::span<const CurveRow> rows);
/// Whitespace-separated columns with a '#' header, one block per method,
/// blocks separated by two blank lines (gnuplot `index`).
void write_curve_dat(std::ostream& out, std::span<const CurveRow> rows);

}  // namespace abstain::eval
