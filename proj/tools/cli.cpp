#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "abstain/core.hpp"
#include "abstain/errors.hpp"
#include "abstain/eval.hpp"
#include "abstain/io.hpp"
#include "abstain/models.hpp"
#include "abstain/synthetic.hpp"
#include "abstain/train.hpp"
#include "abstain/verify.hpp"

namespace abstain::cli {

namespace {

struct RunConfig {
  std::string subcommand;
  std::string dataset;
  std::string task;
  std::size_t n = 1000;
  std::optional<double> score_noise;
  bool title_as_no = false;
  double c = 0.05;
  double alpha = 4.0;
  std::optional<double> beta;
  std::string method = "surrogate";
  std::string model = "linear";
  std::size_t hidden = 16;
  std::string grid;
  std::size_t k = 4;
  std::uint64_t seed = 0;
  std::string out;
  double lr = 1e-2;
  int epochs = 500;
  std::size_t batch = 64;
  double l2 = 0.0;
  double max_grad_norm = 1.0;
  bool half_validation = false;
  unsigned threads = 1;
  std::string rejector;
  double threshold = 0.0;
  std::string json_out;
  std::string dat_out;
  bool quick = false;
  double verify_alpha = 2.0;
  double b = 0.0;
  double p = 0.0;
};

nlohmann::json to_json(const RunConfig& r) {
  nlohmann::json j;
  j["subcommand"] = r.subcommand;
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  if (r.subcommand == "gen") {
    j["task"] = r.task;
    j["n"] = r.n;
    j["score_noise"] = opt(r.score_noise);
    j["seed"] = r.seed;
    j["out"] = r.out;
    return j;
  }
  if (r.subcommand == "verify") {
    j["quick"] = r.quick;
    j["alpha"] = r.verify_alpha;
    j["seed"] = r.seed;
    j["out"] = r.out;
    return j;
  }
  j["dataset"] = r.dataset;
  j["task"] = r.task;
  j["n"] = r.n;
  j["score_noise"] = opt(r.score_noise);
  j["title_as_no"] = r.title_as_no;
  j["seed"] = r.seed;
  j["out"] = r.out;
  if (r.subcommand == "eval") {
    j["rejector"] = r.rejector;
    j["threshold"] = r.threshold;
    return j;
  }
  j["c"] = r.c;
  j["alpha"] = r.alpha;
  j["beta"] = opt(r.beta);
  j["method"] = r.method;
  j["model"] = r.model;
  j["hidden"] = r.hidden;
  j["lr"] = r.lr;
  j["epochs"] = r.epochs;
  j["batch"] = r.batch;
  j["l2"] = r.l2;
  j["max_grad_norm"] = r.max_grad_norm;
  if (r.subcommand == "sweep") {
    j["grid"] = r.grid;
    j["k"] = r.k;
    j["half_validation"] = r.half_validation;
    j["threads"] = r.threads;
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

void echo_config(const RunConfig& r) {
  if (r.out.empty()) return;
  write_text(r.out + ".config.json", to_json(r).dump(2) + "\n");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse grid entry '" + item + "'");
    }
  }
  if (grid.empty()) throw ValidationError("grid is empty");
  return grid;
}

std::string default_grid(eval::Method method) {
  if (method == eval::Method::kSurrogate) return "0.15,0.1,0.07,0.05,0.03";
  return "0.9,0.92,0.93,0.94,0.95,0.96,0.97,0.98,0.99";
}

Dataset load_data(const RunConfig& r) {
  if (!r.dataset.empty() && !r.task.empty()) {
    throw ValidationError("give either --dataset or --task, not both");
  }
  if (!r.dataset.empty()) {
    return read_jsonl(r.dataset, r.title_as_no ? TitlePolicy::kAsNo : TitlePolicy::kAsYes);
  }
  if (!r.task.empty()) {
    auto task = synthetic::parse_task(r.task);
    if (r.score_noise) task.score_noise = r.score_noise;
    return synthetic::sample(task, r.n, r.seed);
  }
  throw ValidationError("one of --dataset or --task is required");
}

RejectorSpec model_spec(const RunConfig& r) {
  RejectorSpec spec;
  spec.kind = parse_rejector_kind(r.model);
  spec.hidden = r.hidden;
  return spec;
}

TrainConfig train_config(const RunConfig& r) {
  TrainConfig cfg;
  cfg.learning_rate = r.lr;
  cfg.epochs = r.epochs;
  cfg.batch_size = r.batch;
  cfg.seed = r.seed;
  cfg.l2_penalty = r.l2;
  cfg.max_grad_norm = r.max_grad_norm;
  validate(cfg);
  return cfg;
}

std::string format_number(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

int cmd_gen(const RunConfig& r, std::ostream& out) {
  auto task = synthetic::parse_task(r.task);
  if (r.score_noise) task.score_noise = r.score_noise;
  const auto data = synthetic::sample(task, r.n, r.seed);
  write_jsonl(std::filesystem::path(r.out), data);
  echo_config(r);
  out << "wrote " << data.size() << " examples (positive rate "
      << format_number(data.positive_rate()) << ") to " << r.out << "\n";
  return kOk;
}

int cmd_train(const RunConfig& r, std::ostream& out, std::ostream& err) {
  const auto params = make_params(r.c, r.alpha, r.beta);
  const auto data = load_data(r);
  const auto cfg = train_config(r);
  const auto init = init_rejector(model_spec(r), data.dim(), r.seed);
  TrainReport report = [&] {
    if (r.method == "surrogate") return train_surrogate(data, params, init, cfg);
    if (r.method == "cross_entropy") return train_cross_entropy(data, init, cfg);
    throw ValidationError("train --method must be surrogate or cross_entropy");
  }();
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  auto j = report_to_json(report);
  j["method"] = r.method;
  write_text(r.out, j.dump(2) + "\n");
  echo_config(r);
  out << "final loss " << format_number(report.loss_trace.back()) << ", wrote " << r.out << "\n";
  return kOk;
}

int cmd_eval(const RunConfig& r, std::ostream& out) {
  const auto data = load_data(r);
  std::ifstream in(r.rejector);
  if (!in) throw IoError("cannot open rejector " + r.rejector);
  nlohmann::json rj;
  try {
    rj = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed rejector file: ") + e.what());
  }
  // Accept either a bare rejector or a train report.
  const auto rejector = rejector_from_json(rj.contains("rejector") ? rj["rejector"] : rj);
  std::vector<double> values;
  values.reserve(data.size());
  for (const auto& e : data.examples()) values.push_back(predict(rejector, e) - r.threshold);
  const auto pc = eval::precision_coverage(values, data.annotations());
  nlohmann::json j;
  j["n"] = pc.n;
  j["n_accepted"] = pc.n_accepted;
  j["coverage"] = pc.coverage;
  j["precision"] = pc.precision ? nlohmann::json(*pc.precision) : nlohmann::json(nullptr);
  j["threshold"] = r.threshold;
  const auto text = j.dump(2) + "\n";
  if (r.out.empty()) {
    out << text;
  } else {
    write_text(r.out, text);
    echo_config(r);
  }
  return kOk;
}

int cmd_sweep(RunConfig r, std::ostream& out) {
  const auto method = eval::parse_method(r.method);
  if (r.grid.empty()) r.grid = default_grid(method);
  const auto grid = parse_grid(r.grid);
  const auto data = load_data(r);
  const auto folds = kfold_split(data, r.k, r.seed);
  eval::SweepOptions options;
  options.alpha = r.alpha;
  options.model = model_spec(r);
  options.seed = r.seed;
  options.half_validation = r.half_validation;
  options.threads = r.threads;
  const auto rows = eval::sweep(data, method, grid, folds, train_config(r), options);
  eval::export_curve(rows, r.out);
  if (!r.json_out.empty()) write_text(r.json_out, eval::curve_to_json(rows).dump(2) + "\n");
  if (!r.dat_out.empty()) {
    std::ostringstream dat;
    eval::write_curve_dat(dat, rows);
    write_text(r.dat_out, dat.str());
  }
  echo_config(r);
  out << "wrote " << rows.size() << " rows to " << r.out << "\n";
  return kOk;
}

int cmd_verify(const RunConfig& r, std::ostream& out) {
  verify::VerifyOptions options;
  options.quick = r.quick;
  options.alpha = r.verify_alpha;
  options.seed = r.seed;
  const auto results = verify::run_property_suite(options);
  std::ostringstream csv;
  verify::write_property_csv(csv, results);
  if (r.out.empty()) {
    out << csv.str();
  } else {
    write_text(r.out, csv.str());
    echo_config(r);
    out << csv.str();
  }
  const bool ok = std::all_of(results.begin(), results.end(), [](const auto& p) { return p.passed; });
  return ok ? kOk : kVerificationFailure;
}

int cmd_limit(const RunConfig& r, std::ostream& out) {
  out << format_number(eval::theoretical_limit(r.b, r.p), "%.4f") << "\n";
  return kOk;
}

void add_data_options(CLI::App* sub, RunConfig& r) {
  sub->add_option("--dataset", r.dataset, "JSONL dataset");
  sub->add_option("--task", r.task, "synthetic task (name, inline JSON or .json file) to sample");
  sub->add_option("--n", r.n, "examples to sample when --task is used");
  sub->add_option("--score-noise", r.score_noise, "override the task's score noise amplitude");
  sub->add_flag("--title-as-no", r.title_as_no, "map 'title' annotations to -1");
}

void add_train_options(CLI::App* sub, RunConfig& r) {
  sub->add_option("--c", r.c, "cost of rejection, in (0, 1)");
  sub->add_option("--alpha", r.alpha, "surrogate alpha");
  sub->add_option("--beta", r.beta, "surrogate beta (default: solved from the constraint)");
  sub->add_option("--model", r.model, "rejector family")
      ->check(CLI::IsMember({"constant", "linear", "mlp1", "score_offset"}));
  sub->add_option("--hidden", r.hidden, "mlp1 hidden width");
  sub->add_option("--lr", r.lr, "learning rate");
  sub->add_option("--epochs", r.epochs, "training epochs");
  sub->add_option("--batch", r.batch, "mini-batch size");
  sub->add_option("--l2", r.l2, "L2 penalty on parameters");
  sub->add_option("--max-grad-norm", r.max_grad_norm, "clip batch gradients to this norm (0: off)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig r;
  CLI::App app{"Learning to reject with a fixed predictor", "abstain"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "sample a synthetic task to JSONL");
  gen->add_option("--task", r.task, "task name, inline JSON or .json file")->required();
  gen->add_option("--n", r.n, "number of examples");
  gen->add_option("--score-noise", r.score_noise, "write score = eta(x) + U(-a, a)");
  gen->add_option("--seed", r.seed, "random seed");
  gen->add_option("--out", r.out, "output JSONL path")->required();

  auto* train = app.add_subcommand("train", "train a rejector and write a JSON report");
  add_data_options(train, r);
  add_train_options(train, r);
  train->add_option("--method", r.method, "training loss")
      ->check(CLI::IsMember({"surrogate", "cross_entropy"}));
  train->add_option("--seed", r.seed, "random seed");
  train->add_option("--out", r.out, "output report path")->required();

  auto* ev = app.add_subcommand("eval", "precision and coverage of a serialized rejector");
  add_data_options(ev, r);
  ev->add_option("--rejector", r.rejector, "rejector or train report JSON")->required();
  ev->add_option("--threshold", r.threshold, "accept iff r(x) > threshold");
  ev->add_option("--seed", r.seed, "random seed for --task sampling");
  ev->add_option("--out", r.out, "output JSON path (default: stdout)");

  auto* sw = app.add_subcommand("sweep", "cross-validated precision/coverage curve to CSV");
  add_data_options(sw, r);
  add_train_options(sw, r);
  sw->add_option("--method", r.method, "rejection method")
      ->check(CLI::IsMember({"maxprob", "cross_entropy", "surrogate"}));
  sw->add_option("--grid", r.grid,
                 "comma-separated costs (surrogate) or target precisions (default per method)");
  sw->add_option("--k", r.k, "cross-validation folds");
  sw->add_option("--seed", r.seed, "random seed");
  sw->add_flag("--half-validation", r.half_validation,
               "cross_entropy: fit threshold on half of each held-out fold");
  sw->add_option("--threads", r.threads, "worker threads for sweep cells");
  sw->add_option("--out", r.out, "output CSV path")->required();
  sw->add_option("--json", r.json_out, "also write rows as JSON");
  sw->add_option("--dat", r.dat_out, "also write a gnuplot data file");

  auto* ver = app.add_subcommand("verify", "run the theory property grids");
  ver->add_flag("--quick", r.quick, "smaller grids and sample sizes");
  ver->add_option("--alpha", r.verify_alpha, "alpha for the consistency-bound check");
  ver->add_option("--seed", r.seed, "random seed");
  ver->add_option("--out", r.out, "output CSV path (also echoed to stdout)");

  auto* lim = app.add_subcommand("limit", "theoretical coverage limit min(1, b / p)");
  lim->add_option("--b", r.b, "fraction of positive examples")->required();
  lim->add_option("--p", r.p, "target precision")->required();

  // Config keys live in a section named after the subcommand, e.g. [train].
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");
  for (auto* sub : {gen, train, ev, sw, ver, lim}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    err << app.help();
    return kValidationError;
  }

  try {
    if (gen->parsed()) { r.subcommand = "gen"; return cmd_gen(r, out); }
    if (train->parsed()) { r.subcommand = "train"; return cmd_train(r, out, err); }
    if (ev->parsed()) { r.subcommand = "eval"; return cmd_eval(r, out); }
    if (sw->parsed()) { r.subcommand = "sweep"; return cmd_sweep(r, out); }
    if (ver->parsed()) { r.subcommand = "verify"; return cmd_verify(r, out); }
    if (lim->parsed()) { r.subcommand = "limit"; return cmd_limit(r, out); }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  }
  return kValidationError;
}

}  // namespace abstain::cli
