#include "safecct/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace safecct {

using nlohmann::json;

namespace {

std::string at(int i, int j) {
  // 1-based in messages, matching document indexing
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

bool all_finite(const Eigen::Ref<const Mat>& a) { return a.allFinite(); }

}  // namespace

StageModel::StageModel(Vec p, Vec d, Mat K) : p_(std::move(p)), d_(std::move(d)), K_(std::move(K)) {
  const auto m = p_.size();
  if (m == 0) throw ValidationError("stage has no machines");
  if (d_.size() != m) throw ValidationError("d has length " + std::to_string(d_.size()) + ", expected " + std::to_string(m));
  if (K_.rows() != m || K_.cols() != m)
    throw ValidationError("K is " + std::to_string(K_.rows()) + "x" + std::to_string(K_.cols()) + ", expected " +
                          std::to_string(m) + "x" + std::to_string(m));
  if (!all_finite(p_) || !all_finite(d_) || !all_finite(K_)) throw ValidationError("non-finite entry in p, d or K");
  for (int i = 0; i < m; ++i)
    if (!(d_[i] > 0.0)) throw ValidationError("d not positive at machine " + std::to_string(i + 1));
  const double scale = std::max(1.0, K_.cwiseAbs().maxCoeff());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (K_(i, j) < 0.0) throw ValidationError("K negative at " + at(i, j));
      if (std::abs(K_(i, j) - K_(j, i)) > 1e-12 * scale) throw ValidationError("K not symmetric at " + at(i, j));
    }
  }
  for (int i = 0; i < m; ++i) K_(i, i) = 0.0;
  K_ = 0.5 * (K_ + K_.transpose()).eval();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (K_(i, j) > 0.0) edges_.push_back({i, j});
}

std::vector<int> StageModel::neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < size(); ++j)
    if (j != i && K_(i, j) > 0.0) out.push_back(j);
  return out;
}

void Bounds::validate(int m) const {
  if (lower.size() != m || upper.size() != m)
    throw ValidationError("bounds have length " + std::to_string(lower.size()) + "/" + std::to_string(upper.size()) +
                          ", expected " + std::to_string(m));
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw ValidationError("bounds not finite at machine " + std::to_string(i + 1));
    if (!(lower[i] < upper[i])) throw ValidationError("bounds lower >= upper at machine " + std::to_string(i + 1));
    if (!(upper[i] - lower[i] < 2.0 * std::numbers::pi))
      throw ValidationError("bounds wider than 2*pi at machine " + std::to_string(i + 1));
  }
}

std::string Scenario::machine_name(int i) const {
  if (i < static_cast<int>(metadata.size()) && !metadata[i].name.empty()) return metadata[i].name;
  return "G" + std::to_string(i + 1);
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, two_pi);
  if (r < 0) r += two_pi;
  r -= std::numbers::pi;  // [-π, π)
  if (r == -std::numbers::pi) r = std::numbers::pi;
  return r;
}

double rebase_angle(double a, double center) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double k = std::floor((a - center + std::numbers::pi) / two_pi);
  return a - k * two_pi;
}

GridState GridState::from_lifted(const Vec& lifted_angles, const Vec& velocities) {
  GridState s{lifted_angles.unaryExpr([](double a) { return wrap_angle(a); }), velocities};
  return s;
}

Vec GridState::stacked() const {
  Vec x(angles.size() * 2);
  x << angles, velocities;
  return x;
}

// ---------------------------------------------------------------------------
// scenario documents

namespace {

struct Reader {
  std::string path;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError("field '" + path + "': " + what); }

  Reader child(const std::string& key) const { return {path.empty() ? key : path + "." + key}; }
  Reader index(std::size_t i) const { return {path + "[" + std::to_string(i) + "]"}; }

  double number(const json& j) const {
    if (!j.is_number()) fail("expected a number");
    return j.get<double>();
  }

  Vec vector(const json& j) const {
    if (!j.is_array()) fail("expected an array of numbers");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = index(i).number(j[i]);
    return v;
  }

  Mat matrix(const json& j) const {
    if (!j.is_array()) fail("expected a nested array (rows)");
    const auto rows = j.size();
    Mat out(rows, rows);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = index(r);
      if (!j[r].is_array() || j[r].size() != rows) row.fail("expected a row of " + std::to_string(rows) + " numbers");
      for (std::size_t c = 0; c < rows; ++c)
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row.index(c).number(j[r][c]);
    }
    return out;
  }
};

const json& require(const json& obj, const std::string& key, const Reader& r) {
  if (!obj.is_object()) r.fail("expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) r.child(key).fail("missing");
  return *it;
}

StageModel read_stage(const json& j, const Reader& r) {
  Vec p = r.child("p").vector(require(j, "p", r));
  Vec d = r.child("d").vector(require(j, "d", r));
  Mat K = r.child("K").matrix(require(j, "K", r));
  try {
    return StageModel(std::move(p), std::move(d), std::move(K));
  } catch (const ValidationError& e) {
    throw ValidationError(r.path + ": " + e.what());
  }
}

json write_vec(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json write_stage(const StageModel& s) {
  json K = json::array();
  for (int i = 0; i < s.size(); ++i) {
    json row = json::array();
    for (int j = 0; j < s.size(); ++j) row.push_back(s.K()(i, j));
    K.push_back(row);
  }
  return {{"p", write_vec(s.p())}, {"d", write_vec(s.d())}, {"K", K}};
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Scenario load_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  const Reader root{};
  if (!doc.is_object()) root.fail("top level must be an object");

  Scenario s;
  s.pre = read_stage(require(doc, "pre", root), root.child("pre"));
  s.fault = read_stage(require(doc, "fault", root), root.child("fault"));
  s.post = read_stage(require(doc, "post", root), root.child("post"));
  if (s.fault.size() != s.pre.size() || s.post.size() != s.pre.size())
    throw ValidationError("stages have unequal machine counts (" + std::to_string(s.pre.size()) + "/" +
                          std::to_string(s.fault.size()) + "/" + std::to_string(s.post.size()) +
                          "); differing counts are unsupported");
  s.t_fault = root.child("t_fault").number(require(doc, "t_fault", root));
  if (!std::isfinite(s.t_fault)) throw ValidationError("t_fault not finite");

  if (auto it = doc.find("bounds"); it != doc.end() && !it->is_null()) {
    const auto r = root.child("bounds");
    Bounds b{r.child("lower").vector(require(*it, "lower", r)), r.child("upper").vector(require(*it, "upper", r))};
    b.validate(s.size());
    s.bounds = std::move(b);
  }

  if (auto it = doc.find("solver"); it != doc.end() && !it->is_null()) {
    const auto r = root.child("solver");
    if (!it->is_object()) r.fail("expected an object");
    auto num = [&](const char* key, double& dst) {
      if (auto f = it->find(key); f != it->end()) dst = r.child(key).number(*f);
    };
    num("abs_tol", s.solver.abs_tol);
    num("rel_tol", s.solver.rel_tol);
    num("event_tol", s.solver.event_tol);
    num("horizon_s", s.solver.horizon_s);
    num("horizon_cap_s", s.solver.horizon_cap_s);
    num("z2_cap", s.solver.z2_cap);
    num("backward_horizon_s", s.solver.backward_horizon_s);
    num("oracle_horizon_s", s.solver.oracle_horizon_s);
    num("closure_tol", s.solver.closure_tol);
    num("tol_band_frac", s.solver.tol_band_frac);
    if (auto f = it->find("grid_resolution"); f != it->end()) {
      if (!f->is_number_integer()) r.child("grid_resolution").fail("expected an integer");
      s.solver.grid_resolution = f->get<int>();
    }
    if (!(s.solver.abs_tol > 0 && s.solver.rel_tol > 0)) throw ValidationError("solver tolerances must be positive");
    if (!(s.solver.horizon_s > 0)) throw ValidationError("solver.horizon_s must be positive");
    if (s.solver.grid_resolution < 2) throw ValidationError("solver.grid_resolution must be >= 2");
  }

  if (auto it = doc.find("metadata"); it != doc.end() && !it->is_null()) {
    const auto r = root.child("metadata");
    if (!it->is_object()) r.fail("expected an object");
    s.metadata.resize(s.size());
    if (auto names = it->find("names"); names != it->end()) {
      if (!names->is_array() || names->size() != static_cast<std::size_t>(s.size()))
        r.child("names").fail("expected " + std::to_string(s.size()) + " strings");
      for (int i = 0; i < s.size(); ++i) s.metadata[i].name = (*names)[i].get<std::string>();
    }
    auto opt = [&](const char* key, std::optional<double> MachineMeta::*field) {
      if (auto f = it->find(key); f != it->end()) {
        Vec v = r.child(key).vector(*f);
        if (v.size() != s.size()) r.child(key).fail("expected " + std::to_string(s.size()) + " values");
        for (int i = 0; i < s.size(); ++i) s.metadata[i].*field = v[i];
      }
    };
    opt("H", &MachineMeta::H);
    opt("D", &MachineMeta::D);
    opt("r", &MachineMeta::r);
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

std::string save_scenario(const Scenario& s) {
  json doc;
  doc["pre"] = write_stage(s.pre);
  doc["fault"] = write_stage(s.fault);
  doc["post"] = write_stage(s.post);
  doc["t_fault"] = s.t_fault;
  if (s.bounds) doc["bounds"] = {{"lower", write_vec(s.bounds->lower)}, {"upper", write_vec(s.bounds->upper)}};
  const auto& v = s.solver;
  doc["solver"] = {{"abs_tol", v.abs_tol},
                   {"rel_tol", v.rel_tol},
                   {"event_tol", v.event_tol},
                   {"horizon_s", v.horizon_s},
                   {"horizon_cap_s", v.horizon_cap_s},
                   {"z2_cap", v.z2_cap},
                   {"grid_resolution", v.grid_resolution},
                   {"backward_horizon_s", v.backward_horizon_s},
                   {"oracle_horizon_s", v.oracle_horizon_s},
                   {"closure_tol", v.closure_tol},
                   {"tol_band_frac", v.tol_band_frac}};
  if (!s.metadata.empty()) {
    json meta = json::object();
    json names = json::array();
    for (const auto& m : s.metadata) names.push_back(m.name);
    meta["names"] = names;
    auto opt = [&](const char* key, std::optional<double> MachineMeta::*field) {
      bool any = false;
      for (const auto& m : s.metadata) any = any || (m.*field).has_value();
      if (!any) return;
      json arr = json::array();
      for (const auto& m : s.metadata) arr.push_back((m.*field).value_or(0.0));
      meta[key] = arr;
    };
    opt("H", &MachineMeta::H);
    opt("D", &MachineMeta::D);
    opt("r", &MachineMeta::r);
    doc["metadata"] = meta;
  }
  return doc.dump(2) + "\n";
}

Bounds parse_bounds_arg(const std::string& arg) {
  if (arg.find(':') != std::string::npos && arg.find('{') == std::string::npos) {
    std::vector<double> lo, hi;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ParseError("inline bounds entry '" + item + "' lacks ':'");
      try {
        lo.push_back(std::stod(item.substr(0, colon)));
        hi.push_back(std::stod(item.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ParseError("inline bounds entry '" + item + "' is not numeric");
      }
    }
    return {Eigen::Map<Vec>(lo.data(), static_cast<Eigen::Index>(lo.size())),
            Eigen::Map<Vec>(hi.data(), static_cast<Eigen::Index>(hi.size()))};
  }
  std::string text = arg;
  if (arg.find('{') == std::string::npos) {
    std::ifstream in(arg);
    if (!in) throw ParseError("cannot open bounds file '" + arg + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bounds document: ") + e.what());
  }
  const Reader r{"bounds"};
  const json& b = doc.contains("bounds") ? doc["bounds"] : doc;
  return {r.child("lower").vector(require(b, "lower", r)), r.child("upper").vector(require(b, "upper", r))};
}

FrameShift rotating_frame_shift(const StageModel& stage) {
  const double omega = stage.p().sum() / stage.d().sum();
  return {shift_by(stage, omega), omega};
}

StageModel shift_by(const StageModel& stage, double omega) {
  Vec p = stage.p() - stage.d() * omega;
  return StageModel(std::move(p), stage.d(), stage.K());
}

}  // namespace safecct
