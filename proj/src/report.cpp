#include "resflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "resflow/boundary.hpp"

namespace resflow {

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::ParseError, path + ": " + why);
}

const Json& field(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(path + "." + key, "missing");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  double x = j.get<double>();
  if (!std::isfinite(x)) parse_fail(path, "not finite");
  return x;
}

cplx complex_value(const Json& j, const std::string& path) {
  if (j.is_number()) return number(j, path);
  if (!j.is_object()) parse_fail(path, "expected a number or {re, im}");
  double re = number(field(j, path, "re"), path + ".re");
  double im = j.contains("im") ? number(j["im"], path + ".im") : 0.0;
  return {re, im};
}

CMatrix matrix_value(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) parse_fail(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  CMatrix out;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array()) parse_fail(rp, "expected an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      out.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      parse_fail(rp, "row length " + std::to_string(row.size()) + " differs from " + std::to_string(cols));
    }
    for (Eigen::Index k = 0; k < cols; ++k)
      out(i, k) = complex_value(row[static_cast<std::size_t>(k)], rp + "[" + std::to_string(k) + "]");
  }
  return out;
}

HermitianMatrix hermitian_value(const Json& j, const std::string& path) {
  CMatrix a = matrix_value(j, path);
  if (a.rows() != a.cols()) parse_fail(path, "matrix is not square");
  try {
    return HermitianMatrix(a);
  } catch (const Error& e) {
    parse_fail(path, e.what());
  }
}

CVector vector_value(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) parse_fail(path, "expected a non-empty array");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_value(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    parse_fail(path, e.what());
  }
}

ContinuumModel continuum_value(const Json& j, const std::string& path) {
  const Json& ivs = field(j, path, "intervals");
  if (!ivs.is_array()) parse_fail(path + ".intervals", "expected an array");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    std::string ip = path + ".intervals[" + std::to_string(i) + "]";
    out.push_back({number(field(ivs[i], ip, "a"), ip + ".a"), number(field(ivs[i], ip, "b"), ip + ".b"),
                   hermitian_value(field(ivs[i], ip, "C"), ip + ".C")});
  }
  auto jm = hermitian_value(field(j, path, "J"), path + ".J");
  return wrap(path, [&] { return ContinuumModel::make(out, jm); });
}

Json continuum_to_json(const ContinuumModel& c) {
  Json ivs = Json::array();
  for (const auto& iv : c.intervals) ivs.push_back({{"a", iv.a}, {"b", iv.b}, {"C", matrix_to_json(iv.c)}});
  return {{"intervals", ivs}, {"J", matrix_to_json(c.j)}};
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Json to_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Json matrix_to_json(const CMatrix& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < a.cols(); ++k) row.push_back(to_json(a(i, k)));
    rows.push_back(row);
  }
  return rows;
}

Json model_to_json(const OperatorModel& m) {
  if (auto p = std::get_if<FinitePencil>(&m)) {
    Json f = {{"H0", matrix_to_json(p->h0)}, {"V", matrix_to_json(p->v)}};
    if (!p->f.isIdentity(0.0)) {
      f["F"] = matrix_to_json(p->f);
      f["J"] = matrix_to_json(p->j);
    }
    return {{"kind", "finite"}, {"finite", f}};
  }
  if (auto c = std::get_if<ContinuumModel>(&m)) return {{"kind", "continuum"}, {"continuum", continuum_to_json(*c)}};
  const auto& e = std::get<EmbeddedModel>(m);
  Json psi = Json::array();
  for (Eigen::Index i = 0; i < e.psi_hat.size(); ++i) psi.push_back(to_json(e.psi_hat(i)));
  return {{"kind", "embedded"},
          {"embedded",
           {{"base", continuum_to_json(e.base)},
            {"psi_hat", psi},
            {"alpha", e.alpha},
            {"lambda", e.lambda},
            {"r_lambda", e.r_lambda}}}};
}

OperatorModel model_from_json(const Json& j) {
  const Json& kind = field(j, "model", "kind");
  if (!kind.is_string()) parse_fail("kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "finite") {
    const Json& f = field(j, "model", "finite");
    auto h0 = hermitian_value(field(f, "finite", "H0"), "finite.H0");
    if (f.contains("F") || f.contains("J")) {
      CMatrix fm = matrix_value(field(f, "finite", "F"), "finite.F");
      auto jm = hermitian_value(field(f, "finite", "J"), "finite.J");
      auto p = wrap("finite.F", [&] { return FinitePencil::make_rigged(h0, fm, jm); });
      if (f.contains("V")) {
        CMatrix v = matrix_value(f["V"], "finite.V");
        if (v.rows() != p.v.size() || v.cols() != p.v.size() ||
            (v - p.v.matrix()).norm() > 1e-8 * std::max(1.0, v.norm()))
          parse_fail("finite.V", "does not equal F* J F");
      }
      return p;
    }
    auto v = hermitian_value(field(f, "finite", "V"), "finite.V");
    return wrap("finite.V", [&] { return FinitePencil::make(h0, v); });
  }
  if (k == "continuum") return continuum_value(field(j, "model", "continuum"), "continuum");
  if (k == "embedded") {
    const Json& e = field(j, "model", "embedded");
    auto base = continuum_value(field(e, "embedded", "base"), "embedded.base");
    CVector psi = vector_value(field(e, "embedded", "psi_hat"), "embedded.psi_hat");
    double alpha = number(field(e, "embedded", "alpha"), "embedded.alpha");
    double lambda = e.contains("lambda") ? number(e["lambda"], "embedded.lambda") : 0.0;
    double r = e.contains("r_lambda") ? number(e["r_lambda"], "embedded.r_lambda") : 0.0;
    return wrap("embedded", [&] { return embed_eigenvalue(base, psi, alpha, lambda, r); });
  }
  parse_fail("kind", "unknown model kind '" + k + "'");
}

OperatorModel parse_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
  return model_from_json(j);
}

OperatorModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string model_digest(const OperatorModel& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : model_to_json(m).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

template <class T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
std::optional<T> get_opt(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

Json pairs_to_json(const std::vector<std::pair<std::string, Json>>& v) {
  Json o = Json::object();
  for (const auto& [k, x] : v) o[k] = x;
  return o;
}

std::vector<std::pair<std::string, Json>> pairs_from_json(const Json& j) {
  std::vector<std::pair<std::string, Json>> out;
  for (auto it = j.begin(); it != j.end(); ++it) out.emplace_back(it.key(), it.value());
  return out;
}

}  // namespace

Json report_to_json(const Report& r) {
  Json j;
  j["tool_version"] = r.tool_version;
  if (r.seed) j["seed"] = *r.seed;
  j["model"] = {{"kind", r.model_kind}, {"hash", r.model_hash}, {"dims", r.dims}};
  Json q = {{"lambda", r.lambda}};
  if (r.interval) q["interval"] = {r.interval->first, r.interval->second};
  if (r.at) q["at"] = *r.at;
  j["query"] = q;
  Json pts = Json::array();
  for (const auto& p : r.points) {
    Json pj = {{"r_lambda", p.r_lambda},
               {"d", p.order_d},
               {"m", p.geom_mult},
               {"N", p.N},
               {"N_plus", p.N_plus},
               {"N_minus", p.N_minus},
               {"ind", {{"splitting", p.ind_splitting}, {"rindex", p.ind_rindex}, {"signature", p.ind_signature}}},
               {"dim_upsilon1", p.dim_upsilon1},
               {"consistency", p.consistency},
               {"uturn_ok", p.uturn_ok},
               {"y_used", p.y_used}};
    Json cls = Json::object();
    put_opt(cls, "type_I", p.type_I);
    put_opt(cls, "property_S", p.property_S);
    put_opt(cls, "property_P", p.property_P);
    put_opt(cls, "pp_spectrum_ok", p.pp_spectrum_ok);
    put_opt(cls, "property_M", p.property_M);
    pj["classification"] = cls;
    Json sp = Json::array();
    for (const auto& s : p.split_points) sp.push_back({{"r", to_json(s.r)}, {"mult", s.mult}, {"anti", s.anti}});
    pj["split_points"] = sp;
    pts.push_back(pj);
  }
  j["points"] = pts;
  Json tot = {{"total", r.total}};
  put_opt(tot, "ssf_counting", r.ssf_counting);
  put_opt(tot, "tracking", r.tracking);
  tot["agreement"] = r.agreement;
  j["totals"] = tot;
  if (r.example) {
    j["example"] = {{"name", r.example->name},
                    {"expected", pairs_to_json(r.example->expected)},
                    {"measured", pairs_to_json(r.example->measured)},
                    {"mismatches", r.example->mismatches}};
  }
  j["diagnostics"] = r.diagnostics;
  return j;
}

Report report_from_json(const Json& j) {
  try {
    Report r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.seed = get_opt<std::uint64_t>(j, "seed");
    const Json& m = j.at("model");
    r.model_kind = m.at("kind").get<std::string>();
    r.model_hash = m.at("hash").get<std::string>();
    r.dims = m.at("dims").get<int>();
    const Json& q = j.at("query");
    r.lambda = q.at("lambda").get<double>();
    if (q.contains("interval")) r.interval = std::make_pair(q["interval"][0].get<double>(), q["interval"][1].get<double>());
    r.at = get_opt<double>(q, "at");
    for (const auto& pj : j.at("points")) {
      PointReport p;
      p.r_lambda = pj.at("r_lambda").get<double>();
      p.order_d = pj.at("d").get<int>();
      p.geom_mult = pj.at("m").get<int>();
      p.N = pj.at("N").get<int>();
      p.N_plus = pj.at("N_plus").get<int>();
      p.N_minus = pj.at("N_minus").get<int>();
      p.ind_splitting = pj.at("ind").at("splitting").get<int>();
      p.ind_rindex = pj.at("ind").at("rindex").get<int>();
      p.ind_signature = pj.at("ind").at("signature").get<int>();
      p.dim_upsilon1 = pj.at("dim_upsilon1").get<int>();
      p.consistency = pj.at("consistency").get<bool>();
      p.uturn_ok = pj.at("uturn_ok").get<bool>();
      p.y_used = pj.at("y_used").get<double>();
      const Json& cls = pj.at("classification");
      p.type_I = get_opt<std::string>(cls, "type_I");
      p.property_S = get_opt<bool>(cls, "property_S");
      p.property_P = get_opt<bool>(cls, "property_P");
      p.pp_spectrum_ok = get_opt<bool>(cls, "pp_spectrum_ok");
      p.property_M = get_opt<bool>(cls, "property_M");
      for (const auto& s : pj.at("split_points"))
        p.split_points.push_back({cplx(s.at("r").at("re").get<double>(), s.at("r").at("im").get<double>()),
                                  s.at("mult").get<int>(), s.at("anti").get<bool>()});
      r.points.push_back(std::move(p));
    }
    const Json& t = j.at("totals");
    r.total = t.at("total").get<int>();
    r.ssf_counting = get_opt<int>(t, "ssf_counting");
    r.tracking = get_opt<int>(t, "tracking");
    r.agreement = t.at("agreement").get<bool>();
    if (j.contains("example")) {
      const Json& e = j["example"];
      r.example = ExampleSection{e.at("name").get<std::string>(), pairs_from_json(e.at("expected")),
                                 pairs_from_json(e.at("measured")), e.at("mismatches").get<std::vector<std::string>>()};
    }
    r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
}

PointReport point_report(const OperatorModel& m, const IndexReport& ir, bool classify) {
  PointReport p;
  p.r_lambda = ir.r_lambda;
  p.order_d = ir.order_d;
  p.geom_mult = ir.group.plus_record.geom_mult_m;
  p.N = ir.N;
  p.N_plus = ir.N_plus;
  p.N_minus = ir.N_minus;
  p.ind_splitting = ir.ind_splitting;
  p.ind_rindex = ir.ind_rindex;
  p.ind_signature = ir.ind_signature;
  p.dim_upsilon1 = ir.dim_upsilon1;
  p.consistency = ir.consistency;
  p.uturn_ok = ir.uturn_ok;
  p.y_used = ir.group.y_used;
  for (const auto& s : ir.group.split_points) p.split_points.push_back({s.r, s.mult, false});
  for (const auto& s : ir.group.split_points_conj) p.split_points.push_back({s.r, s.mult, true});
  if (classify) {
    auto cl = classify_point(m, ir.lambda, ir.r_lambda);
    p.type_I = type_i_name(cl.type_I_point);
    p.property_S = cl.property_S;
    p.property_P = cl.property_P;
    p.pp_spectrum_ok = cl.pp_spectrum_ok;
    p.property_M = cl.property_M;
  }
  return p;
}

Report analyze(const OperatorModel& m, double lambda, const AnalyzeOptions& opt) {
  Report r;
  r.model_kind = model_kind(m);
  r.model_hash = model_digest(m);
  r.dims = static_cast<int>(model_dim(m));
  r.lambda = lambda;
  r.interval = opt.interval;
  r.at = opt.at;
  auto add_point = [&](const IndexReport& ir) {
    try {
      r.points.push_back(point_report(m, ir, opt.classify));
    } catch (const Error& e) {
      r.points.push_back(point_report(m, ir, false));
      r.diagnostics.push_back("classification at r = " + fmt(ir.r_lambda) + " failed: " + e.what());
    }
    for (const auto& d : ir.diagnostics) r.diagnostics.push_back(d);
  };
  if (opt.at) {
    auto ir = resonance_index(m, lambda, *opt.at, opt.strict);
    add_point(ir);
    r.total = ir.index();
    r.agreement = ir.consistency;
  } else {
    auto [a, b] = opt.interval.value_or(std::make_pair(-1.0, 1.0));
    if (!opt.interval) r.interval = std::make_pair(a, b);
    auto fr = total_resonance_index(m, lambda, a, b, opt.strict);
    for (const auto& ir : fr.per_point) add_point(ir);
    r.total = fr.total;
    r.ssf_counting = fr.ssf_value;
    r.tracking = fr.tracking_value;
    r.agreement = fr.agreement;
    for (const auto& d : fr.diagnostics) r.diagnostics.push_back(d);
  }
  return r;
}

std::string splitting_svg(const Report& r) {
  std::vector<SplitMarker> all;
  for (const auto& p : r.points) all.insert(all.end(), p.split_points.begin(), p.split_points.end());
  double xmin = -1, xmax = 1, ymin = -1, ymax = 1;
  if (!all.empty()) {
    xmin = xmax = all[0].r.real();
    ymin = ymax = all[0].r.imag();
    for (const auto& s : all) {
      xmin = std::min(xmin, s.r.real());
      xmax = std::max(xmax, s.r.real());
      ymin = std::min(ymin, s.r.imag());
      ymax = std::max(ymax, s.r.imag());
    }
    double pad = 0.15 * std::max({xmax - xmin, ymax - ymin, 1e-12});
    xmin -= pad;
    xmax += pad;
    ymin -= pad;
    ymax += pad;
  }
  const double w = 480, h = 480, margin = 40;
  auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (w - 2 * margin); };
  auto py = [&](double y) { return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin); };
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
     << "<title>resonance splitting at lambda = " << fmt(r.lambda) << "</title>\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  if (ymin < 0 && ymax > 0)
    os << "<line x1=\"" << margin << "\" y1=\"" << py(0) << "\" x2=\"" << w - margin << "\" y2=\"" << py(0)
       << "\" stroke=\"gray\" stroke-width=\"1\"/>\n";
  for (const auto& p : r.points) {
    if (p.r_lambda < xmin || p.r_lambda > xmax) continue;
    os << "<line x1=\"" << px(p.r_lambda) << "\" y1=\"" << margin << "\" x2=\"" << px(p.r_lambda) << "\" y2=\""
       << h - margin << "\" stroke=\"lightgray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& s : all) {
    os << "<circle class=\"" << (s.anti ? "anti" : "resonance") << "\" cx=\"" << px(s.r.real()) << "\" cy=\""
       << py(s.r.imag()) << "\" r=\"5\" stroke=\"black\" fill=\"" << (s.anti ? "none" : "black") << "\"/>\n";
  }
  os << "<text x=\"" << margin << "\" y=\"" << h - 10 << "\" font-size=\"12\">Re s: [" << fmt(xmin) << ", "
     << fmt(xmax) << "], Im s: [" << fmt(ymin) << ", " << fmt(ymax) << "]</text>\n</svg>\n";
  return os.str();
}

std::vector<double> parse_grid(const std::string& spec) {
  auto c1 = spec.find(':');
  auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw Error(ErrorCode::ParseError, "lambda grid must be A:B:N, got '" + spec + "'");
  double a, b;
  long n;
  try {
    std::size_t pos;
    a = std::stod(spec.substr(0, c1), &pos);
    b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1), &pos);
    n = std::stol(spec.substr(c2 + 1), &pos);
    if (pos != spec.size() - c2 - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "lambda grid must be A:B:N, got '" + spec + "'");
  }
  if (n < 1) throw Error(ErrorCode::ParseError, "lambda grid needs N >= 1");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

SweepResult sweep(const OperatorModel& m, const std::vector<double>& grid, double a, double b, bool strict) {
  SweepResult out;
  for (double lambda : grid) {
    FlowReport fr;
    double used = lambda;
    try {
      fr = total_resonance_index(m, lambda, a, b, strict);
    } catch (const Error& e) {
      const auto c = e.code();
      if (c != ErrorCode::EigenvalueAtLambda && c != ErrorCode::EndpointResonant && c != ErrorCode::ResonantCoupling) throw;
      used = lambda + 1e-9;
      out.warnings.push_back("lambda = " + fmt(lambda) + ": " + e.what() + "; using " + fmt(used));
      fr = total_resonance_index(m, used, a, b, strict);
    }
    SweepRow row{used, fr.total, fr.ssf_value, fr.agreement};
    out.rows.push_back(row);
  }
  return out;
}

std::string sweep_csv(const SweepResult& s) {
  std::ostringstream os;
  os << "lambda,total_index,ssf_counting,agreement\n";
  for (const auto& r : s.rows) {
    os << fmt(r.lambda) << ',' << r.total_index << ',';
    if (r.ssf) os << *r.ssf;
    os << ',' << (r.agreement ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace resflow
