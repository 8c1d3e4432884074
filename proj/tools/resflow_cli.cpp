#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "resflow/builtins.hpp"
#include "resflow/report.hpp"
#include "resflow/verify.hpp"

using namespace resflow;

namespace {

enum Exit { kOk = 0, kParse = 2, kNumerical = 3, kMismatch = 4, kVerify = 5 };

int error_exit(const Error& e) {
  Json j = {{"error", {{"code", error_name(e.code())}, {"message", e.what()}}}};
  std::cout << j.dump() << "\n";
  switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownExample:
    case ErrorCode::NonSquare:
      return kParse;
    default:
      return kNumerical;
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, path + ": cannot write");
  out << text;
}

void emit(const std::optional<std::string>& path, const std::string& text) {
  if (path) write_text(*path, text);
  else std::cout << text;
}

std::pair<int, int> parse_dims(const std::string& s) {
  auto dot = s.find("..");
  try {
    if (dot == std::string::npos) {
      int v = std::stoi(s);
      return {v, v};
    }
    int lo = std::stoi(s.substr(0, dot)), hi = std::stoi(s.substr(dot + 2));
    if (lo < 1 || hi < lo) throw std::invalid_argument("range");
    return {lo, hi};
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "--dims expects LO..HI, got '" + s + "'");
  }
}

ExampleSection example_section(const BuiltinExample& ex, const ExampleCheck& c) {
  ExampleSection s;
  s.name = ex.name;
  auto add = [](auto& list, const char* k, const auto& v) {
    if (v) list.emplace_back(k, Json(*v));
  };
  add(s.expected, "index", ex.expected.index);
  add(s.expected, "order", ex.expected.order);
  add(s.expected, "N_plus", ex.expected.n_plus);
  add(s.expected, "N_minus", ex.expected.n_minus);
  add(s.expected, "total", ex.expected.total);
  add(s.expected, "property_S", ex.expected.property_S);
  add(s.expected, "property_P", ex.expected.property_P);
  add(s.measured, "index", c.measured.index);
  add(s.measured, "order", c.measured.order);
  add(s.measured, "N_plus", c.measured.n_plus);
  add(s.measured, "N_minus", c.measured.n_minus);
  add(s.measured, "total", c.measured.total);
  add(s.measured, "property_S", c.measured.property_S);
  add(s.measured, "property_P", c.measured.property_P);
  s.mismatches = c.mismatches;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonance index and spectral flow analysis for self-adjoint pencils"};
  app.require_subcommand(1);

  std::string model_path, grid_spec, dims_spec = "2..6", example_name, plot_path;
  std::optional<std::string> out_path;
  double lambda = 0.0, tol_scale = 1.0;
  std::vector<double> interval;
  std::optional<double> at;
  bool strict = false, list = false, corrupt = false;
  std::uint64_t seed = 42;
  int trials = 50;

  auto* analyze_cmd = app.add_subcommand("analyze", "index and classification of one model");
  analyze_cmd->add_option("--model", model_path, "model JSON file")->required();
  analyze_cmd->add_option("--lambda", lambda, "spectral level")->required();
  analyze_cmd->add_option("--interval", interval, "coupling interval A B")->expected(2);
  analyze_cmd->add_option("--at", at, "single real resonance point");
  analyze_cmd->add_option("--plot", plot_path, "write an SVG splitting diagram");
  analyze_cmd->add_option("--out", out_path, "report path (stdout when absent)");
  analyze_cmd->add_flag("--strict", strict, "treat rank mismatches as fatal");

  auto* sweep_cmd = app.add_subcommand("sweep", "total index over a lambda grid");
  sweep_cmd->add_option("--model", model_path, "model JSON file")->required();
  sweep_cmd->add_option("--lambda-grid", grid_spec, "A:B:N")->required();
  sweep_cmd->add_option("--interval", interval, "coupling interval A B")->expected(2)->required();
  sweep_cmd->add_option("--out", out_path, "CSV path (stdout when absent)");
  sweep_cmd->add_flag("--strict", strict, "treat rank mismatches as fatal");

  auto* ex_cmd = app.add_subcommand("examples", "run a built-in example and compare with its stated values");
  ex_cmd->add_option("name", example_name, "example name");
  ex_cmd->add_flag("--list", list, "list example names");
  ex_cmd->add_option("--plot", plot_path, "write an SVG splitting diagram");
  ex_cmd->add_option("--out", out_path, "report path (stdout when absent)");

  auto* verify_cmd = app.add_subcommand("verify", "randomized property suite");
  verify_cmd->add_option("--seed", seed, "suite seed");
  verify_cmd->add_option("--trials", trials, "number of random pencils")->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--dims", dims_spec, "dimension range LO..HI");
  verify_cmd->add_option("--tol-scale", tol_scale, "multiplies every check tolerance")->check(CLI::PositiveNumber);
  verify_cmd->add_flag("--corrupt-tol", corrupt, "debug: shrink tolerances to force failures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    std::optional<std::pair<double, double>> iv;
    if (interval.size() == 2) iv = std::make_pair(interval[0], interval[1]);

    if (*analyze_cmd) {
      auto m = load_model(model_path);
      Report r = analyze(m, lambda, {iv, at, strict, true});
      emit(out_path, report_to_json(r).dump(2) + "\n");
      if (!plot_path.empty()) write_text(plot_path, splitting_svg(r));
      return kOk;
    }
    if (*sweep_cmd) {
      auto m = load_model(model_path);
      auto s = sweep(m, parse_grid(grid_spec), iv->first, iv->second, strict);
      for (const auto& w : s.warnings) std::cerr << "warning: " << w << "\n";
      emit(out_path, sweep_csv(s));
      return kOk;
    }
    if (*ex_cmd) {
      if (list || example_name.empty()) {
        for (const auto& n : builtin_names()) std::cout << n << "\n";
        return kOk;
      }
      auto ex = builtin_example(example_name);
      AnalyzeOptions ao;
      if (ex.interval) ao.interval = ex.interval;
      else ao.at = ex.r_lambda;
      Report r = analyze(ex.model, ex.lambda, ao);
      auto c = check_example(ex);
      r.example = example_section(ex, c);
      emit(out_path, report_to_json(r).dump(2) + "\n");
      if (!plot_path.empty()) write_text(plot_path, splitting_svg(r));
      for (const auto& mm : c.mismatches) std::cerr << "mismatch: " << mm << "\n";
      return c.ok() ? kOk : kMismatch;
    }
    if (*verify_cmd) {
      auto [lo, hi] = parse_dims(dims_spec);
      VerifyOptions vo;
      vo.seed = seed;
      vo.trials = trials;
      vo.dim_lo = lo;
      vo.dim_hi = hi;
      vo.tol_scale = tol_scale;
      vo.corrupt = corrupt;
      auto s = run_verify(vo);
      std::cout << s.text();
      return s.all_passed() ? kOk : kVerify;
    }
  } catch (const Error& e) {
    return error_exit(e);
  }
  return kOk;
}
