#include "abstain/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "abstain/errors.hpp"

namespace abstain::eval {

PCPoint precision_coverage(std::span<const double> r_values, std::span<const int> annotations) {
  if (r_values.size() != annotations.size()) {
    throw ValidationError("rejector values and annotations differ in length");
  }
  if (r_values.empty()) throw ValidationError("precision/coverage of an empty set");
  PCPoint pc;
  pc.n = r_values.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pc.n; ++i) {
    if (r_values[i] > 0.0) {
      ++pc.n_accepted;
      if (annotations[i] == 1) ++correct;
    }
  }
  pc.coverage = static_cast<double>(pc.n_accepted) / static_cast<double>(pc.n);
  if (pc.n_accepted > 0) {
    pc.precision = static_cast<double>(correct) / static_cast<double>(pc.n_accepted);
  }
  return pc;
}

std::optional<double> fit_threshold(std::span<const double> scores,
                                    std::span<const int> annotations, double target_precision) {
  if (scores.size() != annotations.size()) {
    throw ValidationError("scores and annotations differ in length");
  }
  if (scores.empty()) throw ValidationError("cannot fit a threshold on no data");
  if (!(target_precision > 0.0 && target_precision <= 1.0)) {
    throw ValidationError("target precision must lie in (0, 1]");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });

  // Walking down the distinct scores: theta = current value accepts every
  // example strictly above it, i.e. everything consumed so far.
  std::optional<double> best;
  std::size_t best_accepted = 0;
  std::size_t accepted = 0;
  std::size_t correct = 0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double theta = scores[order[k]];
    if (accepted > 0) {
      const double precision = static_cast<double>(correct) / static_cast<double>(accepted);
      if (precision >= target_precision && accepted >= best_accepted) {
        best = theta;
        best_accepted = accepted;
      }
    }
    while (k < order.size() && scores[order[k]] == theta) {
      ++accepted;
      if (annotations[order[k]] == 1) ++correct;
      ++k;
    }
  }
  return best;
}

double theoretical_limit(double positive_rate, double target_precision) {
  if (!(positive_rate > 0.0 && positive_rate <= 1.0) ||
      !(target_precision > 0.0 && target_precision <= 1.0)) {
    throw ValidationError("positive rate and target precision must lie in (0, 1]");
  }
  return std::min(1.0, positive_rate / target_precision);
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kMaxProb: return "maxprob";
    case Method::kCrossEntropy: return "cross_entropy";
    case Method::kSurrogate: return "surrogate";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "maxprob") return Method::kMaxProb;
  if (name == "cross_entropy") return Method::kCrossEntropy;
  if (name == "surrogate") return Method::kSurrogate;
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

namespace {

std::vector<double> offsets(std::span<const double> scores, std::optional<double> threshold) {
  std::vector<double> r(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    // No feasible threshold: reject everything.
    r[i] = threshold ? scores[i] - *threshold : -1.0;
  }
  return r;
}

std::vector<double> score_values(const Dataset& d) {
  std::vector<double> s;
  s.reserve(d.size());
  for (const auto& e : d.examples()) s.push_back(*e.score);
  return s;
}

std::vector<double> rejector_values(const Rejector& rejector, const Dataset& d) {
  std::vector<double> r;
  r.reserve(d.size());
  for (const auto& e : d.examples()) r.push_back(predict(rejector, e));
  return r;
}

std::vector<int> pick(std::span<const int> v, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

std::vector<double> pick(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

SweepCell thresholded_cell(std::span<const double> fit_scores, std::span<const int> fit_labels,
                           std::span<const double> eval_scores, std::span<const int> eval_labels,
                           double target) {
  SweepCell cell;
  cell.threshold = fit_threshold(fit_scores, fit_labels, target);
  cell.train = precision_coverage(offsets(fit_scores, cell.threshold), fit_labels);
  cell.test = precision_coverage(offsets(eval_scores, cell.threshold), eval_labels);
  return cell;
}

SweepCell run_cell(const Dataset& dataset, Method method, double config, std::size_t fold,
                   const Folds& folds, const TrainConfig& base_cfg, const SweepOptions& options) {
  const auto train_idx = folds.train_indices(fold);
  const auto test_idx = folds.test_indices(fold);
  const Dataset train = dataset.subset(train_idx);
  const Dataset test = dataset.subset(test_idx);
  const auto train_labels = train.annotations();
  const auto test_labels = test.annotations();

  TrainConfig cfg = base_cfg;
  cfg.seed = base_cfg.seed + fold;
  const std::uint64_t init_seed = options.seed + fold;

  SweepCell cell;
  switch (method) {
    case Method::kMaxProb:
      cell = thresholded_cell(score_values(train), train_labels, score_values(test), test_labels,
                              config);
      break;
    case Method::kCrossEntropy: {
      const auto init = init_rejector(options.model, dataset.dim(), init_seed);
      const auto report = train_cross_entropy(train, init, cfg);
      const auto test_scores = rejector_values(report.rejector, test);
      if (!options.half_validation) {
        cell = thresholded_cell(rejector_values(report.rejector, train), train_labels, test_scores,
                                test_labels, config);
        break;
      }
      if (test_idx.size() < 2) throw ValidationError("half-validation needs >= 2 held-out examples");
      std::vector<std::size_t> perm(test_idx.size());
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::mt19937_64 rng(cfg.seed);
      std::shuffle(perm.begin(), perm.end(), rng);
      const std::size_t half = perm.size() / 2;
      std::vector<std::size_t> fit_half(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
      std::vector<std::size_t> eval_half(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
      std::sort(fit_half.begin(), fit_half.end());
      std::sort(eval_half.begin(), eval_half.end());
      cell = thresholded_cell(pick(test_scores, fit_half), pick(test_labels, fit_half),
                              pick(test_scores, eval_half), pick(test_labels, eval_half), config);
      break;
    }
    case Method::kSurrogate: {
      const auto params = make_params(config, options.alpha);
      const auto init = init_rejector(options.model, dataset.dim(), init_seed);
      const auto report = train_surrogate(train, params, init, cfg);
      cell.train = precision_coverage(rejector_values(report.rejector, train), train_labels);
      cell.test = precision_coverage(rejector_values(report.rejector, test), test_labels);
      break;
    }
  }
  cell.fold = fold;
  cell.config = config;
  return cell;
}

struct MeanStd {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  const double n = static_cast<double>(v.size());
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / n);
  return out;
}

std::string format6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<SweepCell> sweep_cells(const Dataset& dataset, Method method,
                                   std::span<const double> grid, const Folds& folds,
                                   const TrainConfig& base_cfg, const SweepOptions& options) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  if (folds.assignments.size() != dataset.size()) {
    throw ValidationError("fold assignment does not match dataset size");
  }
  if (method == Method::kMaxProb && !dataset.has_scores()) {
    throw ValidationError("maxprob needs a score on every example");
  }
  if (method == Method::kSurrogate) {
    for (double c : grid) make_params(c, options.alpha);
  } else {
    for (double p : grid) {
      if (!(p > 0.0 && p <= 1.0)) throw ValidationError("target precisions must lie in (0, 1]");
    }
  }
  validate(base_cfg);

  const std::size_t total = grid.size() * folds.k;
  std::vector<SweepCell> cells(total);
  auto work = [&](std::size_t idx) {
    const std::size_t g = idx / folds.k;
    const std::size_t f = idx % folds.k;
    cells[idx] = run_cell(dataset, method, grid[g], f, folds, base_cfg, options);
    cells[idx].grid_index = g;
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(total)));
  if (threads == 1) {
    for (std::size_t i = 0; i < total; ++i) work(i);
    return cells;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < total; i = next++) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return cells;
}

std::vector<CurveRow> aggregate(Method method, std::span<const SweepCell> cells,
                                std::size_t grid_size) {
  std::vector<CurveRow> rows;
  for (std::size_t g = 0; g < grid_size; ++g) {
    std::vector<double> precisions;
    std::vector<double> coverages;
    CurveRow row;
    row.method = std::string(to_string(method));
    for (const auto& cell : cells) {
      if (cell.grid_index != g) continue;
      row.config = cell.config;
      coverages.push_back(cell.test.coverage);
      if (cell.test.precision) precisions.push_back(*cell.test.precision);
    }
    const auto p = mean_std(precisions);
    const auto c = mean_std(coverages);
    row.precision_mean = p.mean;
    row.precision_std = p.std;
    row.coverage_mean = c.mean;
    row.coverage_std = c.std;
    row.folds = coverages.size();
    rows.push_back(row);
  }
  return rows;
}

std::vector<CurveRow> sweep(const Dataset& dataset, Method method, std::span<const double> grid,
                            const Folds& folds, const TrainConfig& base_cfg,
                            const SweepOptions& options) {
  const auto cells = sweep_cells(dataset, method, grid, folds, base_cfg, options);
  return aggregate(method, cells, grid.size());
}

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows) {
  out << kCurveHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << format6(r.config) << ',' << format6(r.precision_mean) << ','
        << format6(r.precision_std) << ',' << format6(r.coverage_mean) << ','
        << format6(r.coverage_std) << ',' << r.folds << '\n';
  }
}

std::vector<CurveRow> read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader) {
    throw ValidationError("curve file lacks the expected header");
  }
  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 7) throw ValidationError(rows.size(), "curve row needs 7 fields");
    try {
      CurveRow r;
      r.method = fields[0];
      r.config = std::stod(fields[1]);
      r.precision_mean = std::stod(fields[2]);
      r.precision_std = std::stod(fields[3]);
      r.coverage_mean = std::stod(fields[4]);
      r.coverage_std = std::stod(fields[5]);
      r.folds = std::stoul(fields[6]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw ValidationError(rows.size(), "unparsable number in curve row");
    }
  }
  return rows;
}

void export_curve(std::span<const CurveRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_curve_csv(out, rows);
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json curve_to_json(std::span<const CurveRow> rows) {
  auto number = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"method", r.method},
                   {"config", r.config},
                   {"precision_mean", number(r.precision_mean)},
                   {"precision_std", number(r.precision_std)},
                   {"coverage_mean", r.coverage_mean},
                   {"coverage_std", r.coverage_std},
                   {"folds", r.folds}});
  }
  return arr;
}

void write_curve_dat(std::ostream& out, std::span<const CurveRow> rows) {
  std::string current;
  bool first = true;
  for (const auto& r : rows) {
    if (first || r.method != current) {
      if (!first) out << "\n\n";
      out << "# " << r.method << "\n# config coverage_mean coverage_std precision_mean precision_std\n";
      current = r.method;
      first = false;
    }
    out << format6(r.config) << ' ' << format6(r.coverage_mean) << ' ' << format6(r.coverage_std)
        << ' ' << format6(r.precision_mean) << ' ' << format6(r.precision_std) << '\n';
  }
}

}  // namespace abstain::eval
