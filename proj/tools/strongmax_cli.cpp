#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "strongmax/strongmax.hpp"

using namespace strongmax;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string command;
  std::vector<std::string> grids;
  std::string v_grid;
  std::string family;
  std::vector<std::size_t> shape;
  std::string basis = "all";
  int m = 1;
  std::vector<double> p;
  double q = 0.0;
  double alpha = 0.0;
  double r = 0.0;
  double gamma = 0.5;
  double theta = 0.5;
  double lambda = 0.5;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string format = "json";
  std::string theorem = "all";
  std::string query = "apq";
  std::string select = "cf";
  std::string young;
};

Basis basis_of(const RunConfig& c) {
  Basis b;
  b.kind = basis_kind_from_string(c.basis);
  return b;
}

std::vector<GridFunction> load_grids(const RunConfig& c) {
  if (c.grids.empty()) throw ArgumentError("--grid is required");
  std::vector<GridFunction> out;
  for (const auto& path : c.grids) out.push_back(read_grid_file(path));
  return out;
}

fs::path out_file(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out);
  return fs::path(c.out) / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot write '" + path.string() + "'");
  os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Wall-clock data lives here and nowhere else, so report files hash the same
/// across runs.
void write_meta(const RunConfig& c, const std::vector<std::string>& outputs) {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  json meta = {{"command", c.command}, {"timestamp", ts.str()}, {"threads", thread_count()},
               {"seed", c.seed}, {"outputs", outputs}};
  write_json(out_file(c, c.command + ".meta.json"), meta);
}

YoungFunction parse_young(const std::string& text) {
  // family[:p1,p2]
  YoungSpec spec;
  auto colon = text.find(':');
  spec.family = text.substr(0, colon);
  if (colon != std::string::npos) {
    std::istringstream is(text.substr(colon + 1));
    std::string tok;
    while (std::getline(is, tok, ',')) {
      try {
        spec.params.push_back(std::stod(tok));
      } catch (...) {
        throw ParseError("bad Young parameter '" + tok + "'");
      }
    }
  }
  return young::from_spec(spec);
}

void validate_common(const RunConfig& c) {
  if (c.m < 1) throw ArgumentError("--m must be >= 1");
  if (!(c.alpha >= 0.0)) throw DomainError("--alpha must be >= 0");
  if (c.r != 0.0 && !(c.r > 1.0)) throw DomainError("--r must exceed 1");
  if (!(c.theta > 0.0 && c.theta < 1.0)) throw DomainError("--theta must lie in (0,1)");
  if (!(c.lambda > 0.0 && c.lambda < 1.0)) throw DomainError("--lambda must lie in (0,1)");
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw DomainError("--gamma must lie in (0,1)");
  if (c.format != "json" && c.format != "csv") throw ArgumentError("--format must be json or csv");
}

// ---------------------------------------------------------------------------

int run_maximal(const RunConfig& c) {
  auto gs = load_grids(c);
  std::vector<GridFunction> fs;
  for (int i = 0; i < c.m; ++i) fs.push_back(gs[std::min<std::size_t>(i, gs.size() - 1)]);
  if (gs.size() > 1 && gs.size() != static_cast<std::size_t>(c.m))
    throw ArgumentError("give one --grid, or exactly m of them");
  int n = fs.front().shape().dims;
  if (!(c.alpha < c.m * n)) throw DomainError("--alpha must be below m n");
  MaximalQuery q;
  q.basis = basis_of(c);
  q.alpha = c.alpha;
  q.m = c.m;
  GridFunction mf = c.young.empty() ? multilinear_fractional_maximal(fs, q)
                                    : (q.orlicz.assign(c.m, parse_young(c.young)), orlicz_maximal(fs, q));
  std::string name;
  if (c.format == "csv") {
    name = "maximal.grid";
    write_grid_file(out_file(c, name).string(), mf);
  } else {
    name = "maximal.json";
    json shape = json::array();
    for (int k = 0; k < n; ++k) shape.push_back(mf.shape().extent[k]);
    json j = {{"dims", n},
              {"shape", shape},
              {"basis", c.basis},
              {"m", c.m},
              {"alpha", num(c.alpha)},
              {"values", num_array(std::vector<double>(mf.values().begin(), mf.values().end()))}};
    if (!c.young.empty()) j["young"] = c.young;
    write_json(out_file(c, name), j);
  }
  write_meta(c, {name});
  std::cout << (fs::path(c.out) / name).string() << "\n";
  return 0;
}

json rect_json(const Rect& r, int dims) {
  json lo = json::array(), hi = json::array();
  for (int k = 0; k < dims; ++k) {
    lo.push_back(r.lo[k]);
    hi.push_back(r.hi[k]);
  }
  return {{"lo", lo}, {"hi", hi}};
}

/// Constant on the leading corner windows of side extent/2^k, k = K..0.
template <class Fn>
json corner_profile(const std::vector<GridFunction>& ws, Fn&& constant) {
  const auto& s = ws.front().shape();
  json prof = json::array();
  std::size_t min_ext = *std::min_element(s.extent.begin(), s.extent.begin() + s.dims);
  for (int k = 4; k >= 0; --k) {
    if ((min_ext >> k) < 1) continue;
    std::vector<std::size_t> ext;
    std::vector<double> h, o;
    for (int a = 0; a < s.dims; ++a) {
      ext.push_back(std::max<std::size_t>(1, s.extent[a] >> k));
      h.push_back(s.cell_size[a]);
      o.push_back(s.origin[a]);
    }
    auto sub = GridShape::make(ext, h, o);
    std::vector<GridFunction> crop;
    for (const auto& w : ws) {
      std::vector<double> v(sub.cell_count());
      for (std::size_t f = 0; f < v.size(); ++f) {
        auto idx = sub.unflatten(f);
        std::size_t flat = 0;
        for (int a = 0; a < s.dims; ++a) flat = flat * s.extent[a] + idx[a];
        v[f] = w[flat];
      }
      crop.push_back(GridFunction(sub, v));
    }
    prof.push_back({{"cells", sub.cell_count()}, {"constant", num(constant(crop))}});
  }
  return prof;
}

int run_weights(const RunConfig& c) {
  auto ws = load_grids(c);
  int n = ws.front().shape().dims;
  Basis b = basis_of(c);
  json rep = {{"query", c.query}, {"basis", c.basis}};
  auto classify_cap = [](double v) { return v < kWeightCap ? "in class (below cap)" : "not in class (cap exceeded)"; };
  auto wv_of = [&](const std::vector<GridFunction>& w) {
    WeightVector wv;
    wv.w = w;
    wv.p = c.p;
    if (wv.p.size() == 1 && w.size() > 1) wv.p.assign(w.size(), c.p[0]);
    wv.q = c.q > 0.0 ? c.q : 0.0;
    wv.alpha = c.alpha;
    if (wv.q == 0.0) wv.q = 1.0 / (1.0 / wv.p_total() - c.alpha / n);
    return wv;
  };
  if (c.query == "ap") {
    if (c.p.size() != 1) throw ArgumentError("--p takes one exponent for ap");
    auto d = ap_constant_detail(ws.front(), c.p[0], b);
    rep["class"] = classify_cap(d.value);
    rep["constant_or_bound"] = num(d.value);
    rep["witness_rect"] = rect_json(d.witness, n);
    rep["scale_profile"] = corner_profile(ws, [&](const auto& w) { return ap_constant(w.front(), c.p[0], b); });
  } else if (c.query == "apq" || c.query == "apvec") {
    if (c.p.empty()) throw ArgumentError("--p is required");
    auto wv = wv_of(ws);
    wv.validate();
    bool apq = c.query == "apq";
    auto d = apq ? multi_weight_constant_apq_detail(wv, b) : multi_weight_constant_ap_detail(wv, b);
    rep["p"] = num_array(wv.p);
    rep["q"] = num(wv.q);
    rep["class"] = classify_cap(d.value);
    rep["constant_or_bound"] = num(d.value);
    rep["witness_rect"] = rect_json(d.witness, n);
    rep["scale_profile"] = corner_profile(ws, [&](const auto& w) {
      auto x = wv;
      x.w = w;
      return apq ? multi_weight_constant_apq(x, b) : multi_weight_constant_ap(x, b);
    });
  } else if (c.query == "bump") {
    if (c.v_grid.empty()) throw ArgumentError("--v is required for bump");
    if (c.r == 0.0) throw ArgumentError("--r is required for bump");
    auto v = read_grid_file(c.v_grid);
    auto wv = wv_of(ws);
    wv.validate();
    auto d = power_bump_check(wv, v, c.r, b);
    rep["class"] = classify_cap(d.value);
    rep["constant_or_bound"] = num(d.value);
    rep["witness_rect"] = rect_json(d.witness, n);
    rep["scale_profile"] = json::array();
  } else if (c.query == "ainf") {
    auto a = a_infty_classify(ws.front());
    rep["class"] = a.in_class ? "in A_inf" : "not in A_inf";
    rep["constant_or_bound"] = num(a.constant);
    rep["witness_rect"] = rect_json(a.witness_r, n);
    rep["scale_profile"] = a.to_json()["profile"];
    rep["detail"] = a.to_json();
  } else if (c.query == "rd") {
    auto d = reverse_doubling(ws.front());
    rep["class"] = d.in_class ? "reverse doubling" : "not reverse doubling";
    rep["constant_or_bound"] = num(d.d);
    rep["witness_rect"] = rect_json(d.parent, n);
    rep["scale_profile"] = json::array();
  } else if (c.query == "tauberian") {
    auto t = tauberian_constant_estimate(ws.front(), b, c.gamma, 16, c.seed);
    rep["class"] = "lower bound only";
    rep["constant_or_bound"] = num(t.ratio);
    rep["witness_rect"] = t.witness;
    rep["scale_profile"] = json::array();
    rep["detail"] = t.to_json();
  } else {
    throw ArgumentError("unknown --query '" + c.query + "' (ap, apq, apvec, bump, ainf, rd, tauberian)");
  }
  std::string name = "weights." + c.format;
  if (c.format == "csv") {
    std::ostringstream os;
    os << "query,class,constant_or_bound\n" << c.query << "," << rep["class"].get<std::string>() << ","
       << rep["constant_or_bound"].dump() << "\n";
    write_text(out_file(c, name), os.str());
  } else {
    write_json(out_file(c, name), rep);
  }
  write_meta(c, {name});
  std::cout << rep["class"].get<std::string>() << " " << rep["constant_or_bound"].dump() << "\n";
  return 0;
}

int run_cover(const RunConfig& c) {
  if (c.family.empty()) throw ArgumentError("--family is required");
  GridShape shape;
  std::optional<GridFunction> w;
  if (!c.grids.empty()) {
    w = read_grid_file(c.grids.front());
    shape = w->shape();
  } else if (!c.shape.empty()) {
    shape = GridShape::make(c.shape);
  } else {
    throw ArgumentError("--grid or --shape is required for cover");
  }
  std::ifstream in(c.family);
  if (!in) throw ParseError("cannot open family file '" + c.family + "'");
  auto fam = parse_rect_family(in, shape);
  SelectionResult res = c.select == "scattered"
                            ? scattered_select(fam, c.lambda, w ? *w : GridFunction(shape, 1.0))
                        : c.select == "cf" ? cf_select(fam, c.theta)
                                           : throw ArgumentError("--select must be cf or scattered");
  std::string name = "cover." + c.format;
  if (c.format == "csv") {
    std::ostringstream os;
    os << "index,tag\n";
    for (auto i : res.kept) os << i << "," << (fam.tags.empty() ? 0 : fam.tags[i]) << "\n";
    write_text(out_file(c, name), os.str());
  } else {
    write_json(out_file(c, name), res.to_json());
  }
  write_meta(c, {name});
  std::cout << "kept " << res.kept.size() << " of " << fam.size() << "\n";
  return res.all_checks_hold() ? 0 : 1;
}

void flatten(const VerificationReport& r, const std::string& path, std::ostream& os) {
  std::string p = path.empty() ? r.id : path + "/" + r.id;
  os << p << "," << num(r.lhs).dump() << "," << num(r.rhs).dump() << "," << num(r.ratio).dump() << ","
     << to_string(r.status) << "\n";
  for (const auto& ch : r.children) flatten(ch, p, os);
}

int run_verify(const RunConfig& c) {
  auto rep = verify(c.theorem, c.seed);
  std::string stem = "verify_" + (c.theorem == "all" ? std::string("all") : find_theorem(c.theorem).id);
  std::vector<std::string> names{stem + ".json"};
  write_json(out_file(c, names[0]), rep.to_json());
  if (c.format == "csv") {
    std::ostringstream os;
    os << "path,lhs,rhs,ratio,status\n";
    flatten(rep, "", os);
    names.push_back(stem + ".csv");
    write_text(out_file(c, names[1]), os.str());
  }
  write_meta(c, names);
  const auto& rows = c.theorem == "all" ? rep.children : std::vector<VerificationReport>{rep};
  for (const auto& r : rows) std::cout << std::left << std::setw(18) << r.id << " " << to_string(r.status) << "\n";
  return rep.failed() ? 1 : 0;
}

int run_demo(const RunConfig& c) {
  auto rd = prop35_counterexample(2);
  auto ep = endpoint_unit_indicator(64);
  json j = {{"rd_not_ainfty", rd.to_json()}, {"endpoint_unit_indicator", ep.to_json()}};
  write_json(out_file(c, "demo.json"), j);
  write_meta(c, {"demo.json"});
  std::cout << std::left << std::setw(32) << "check" << std::setw(14) << "lhs" << std::setw(14) << "rhs" << "status\n";
  auto row = [](const std::string& name, const VerificationReport& r) {
    std::cout << std::left << std::setw(32) << name << std::setw(14) << r.lhs << std::setw(14) << r.rhs
              << to_string(r.status) << "\n";
  };
  for (const auto& ch : rd.children) row("rd weight: " + ch.id, ch);
  row("endpoint: unit indicator", ep);
  return rd.failed() || ep.failed() ? 1 : 0;
}

int fail_with(const std::string& type, const std::string& message) {
  json e = {{"error", {{"type", type}, {"message", message}}}};
  std::cerr << e.dump() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Strong and multilinear fractional maximal operators on grids"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* s) {
    s->add_option("--basis", c.basis, "all, dyadic or cubes");
    s->add_option("--m", c.m, "number of functions");
    s->add_option("--p", c.p, "exponents p_i (comma separated)")->delimiter(',');
    s->add_option("--q", c.q, "target exponent");
    s->add_option("--alpha", c.alpha, "fractional order");
    s->add_option("--r", c.r, "bump exponent (> 1)");
    s->add_option("--gamma", c.gamma, "Tauberian level in (0,1)");
    s->add_option("--theta", c.theta, "covering overlap threshold in (0,1)");
    s->add_option("--lambda", c.lambda, "scattered selection level in (0,1)");
    s->add_option("--seed", c.seed, "seed");
    s->add_option("--out", c.out, "output directory");
    s->add_option("--format", c.format, "json or csv");
  };
  auto* maximal = app.add_subcommand("maximal", "maximal function of grid files");
  maximal->add_option("--grid", c.grids, "grid file (repeat for each slot)")->required();
  maximal->add_option("--young", c.young, "Orlicz averages, e.g. phi_n:2");
  add_common(maximal);
  auto* weights = app.add_subcommand("weights", "weight class constants");
  weights->add_option("--grid", c.grids, "weight grid file (repeat for vectors)")->required();
  weights->add_option("--v", c.v_grid, "target weight for bump queries");
  weights->add_option("--query", c.query, "ap, apq, apvec, bump, ainf, rd, tauberian");
  add_common(weights);
  auto* cover = app.add_subcommand("cover", "rectangle selection");
  cover->add_option("--family", c.family, "CSV of index ranges")->required();
  cover->add_option("--grid", c.grids, "grid file giving the shape and weight");
  cover->add_option("--shape", c.shape, "grid extents (comma separated)")->delimiter(',');
  cover->add_option("--select", c.select, "cf or scattered");
  add_common(cover);
  auto* verify_cmd = app.add_subcommand("verify", "verification checks");
  verify_cmd->add_option("--theorem", c.theorem, "check id or alias, or all");
  add_common(verify_cmd);
  auto* demo = app.add_subcommand("demo", "RD weight and endpoint example");
  add_common(demo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail_with("ParseError", e.what());
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    validate_common(c);
    if (c.command == "maximal") return run_maximal(c);
    if (c.command == "weights") return run_weights(c);
    if (c.command == "cover") return run_cover(c);
    if (c.command == "verify") return run_verify(c);
    return run_demo(c);
  } catch (const ParseError& e) {
    return fail_with("ParseError", e.what());
  } catch (const ShapeError& e) {
    return fail_with("ShapeError", e.what());
  } catch (const BoundsError& e) {
    return fail_with("BoundsError", e.what());
  } catch (const DomainError& e) {
    return fail_with("DomainError", e.what());
  } catch (const MeasureError& e) {
    return fail_with("MeasureError", e.what());
  } catch (const ArgumentError& e) {
    return fail_with("ArgumentError", e.what());
  } catch (const BracketError& e) {
    return fail_with("BracketError", e.what());
  } catch (const std::exception& e) {
    return fail_with("Error", e.what());
  }
}
