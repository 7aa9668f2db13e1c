#include "wrenchsim/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace wrenchsim {

using nlohmann::json;

namespace {

// Reads one JSON object and remembers which keys were consumed so leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key), "missing required field");
    return j_.at(key);
  }

  double number(const std::string& key) { return as_number(at(key), field(key)); }
  double number(const std::string& key, double def) { return has(key) ? number(key) : def; }

  long integer(const std::string& key, long def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v.get<long>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v.get<bool>();
  }

  Vec3 vec3(const std::string& key) { return as_vec3(at(key), field(key)); }
  Vec3 vec3(const std::string& key, const Vec3& def) { return has(key) ? vec3(key) : def; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where, "must be finite");
    return d;
  }

  static Vec3 as_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(where, "expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      out[i] = as_number(v[static_cast<std::size_t>(i)], where + "[" + std::to_string(i) + "]");
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("", what + " syntax error at line " + std::to_string(line) + ", column " +
                              std::to_string(col) + ": " + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Waypoint parse_waypoint(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  Waypoint wp;
  wp.position = r.vec3("position_m");
  wp.tolerance = r.number("tolerance_m", wp.tolerance);
  wp.dwell = r.number("dwell_s", wp.dwell);
  const std::string action = r.string("action", "none");
  if (!parse_action(action, wp.action)) {
    throw ConfigError(r.field("action"), "unknown action '" + action + "'");
  }
  wp.relative_to_place = r.boolean("relative_to_place", false);
  r.finish();
  return wp;
}

TaskPlan parse_plan(const json& j) {
  ObjectReader r(j, "plan");
  TaskPlan plan;
  const json& wps = r.at("waypoints");
  if (!wps.is_array()) throw ConfigError("plan.waypoints", "expected an array");
  for (std::size_t i = 0; i < wps.size(); ++i) {
    plan.waypoints.push_back(parse_waypoint(wps[i], "plan.waypoints[" + std::to_string(i) + "]"));
  }
  plan.place_nominal = r.vec3("place_nominal_m");
  plan.layer_height = r.number("layer_height_m", plan.layer_height);
  plan.layer_index = static_cast<int>(r.integer("layer_index", 0));
  plan.support_x = r.number("support_x_m");
  plan.support_half_width = r.number("support_half_width_m", plan.support_half_width);
  plan.mass_window = r.number("mass_window_s", plan.mass_window);
  r.finish();
  return plan;
}

std::size_t count(ObjectReader& r, const std::string& key, std::size_t def) {
  const long v = r.integer(key, static_cast<long>(def));
  if (v < 0) throw ConfigError(r.field(key), "must be >= 0");
  return static_cast<std::size_t>(v);
}

json mm3(const Vec3& v) { return json::array({v.x() * 1000.0, v.y() * 1000.0, v.z() * 1000.0}); }
json mm2(const Vec3& v) { return json::array({v.x() * 1000.0, v.y() * 1000.0}); }

// nlohmann serializes NaN as null, which is what we want for missing metrics.
double mm(double v) { return v * 1000.0; }

}  // namespace

ScenarioDocument parse_scenario(const std::string& text) {
  const json root = parse_json(text, "scenario");
  ObjectReader r(root, "");
  ScenarioDocument doc;
  Scenario& s = doc.scenario;

  {
    ObjectReader p(r.at("payload"), "payload");
    s.payload.mass = p.number("mass_kg");
    if (s.payload.mass < 0.0) throw ConfigError("payload.mass_kg", "must be >= 0");
    s.payload.com_offset = p.vec3("com_offset_m");
    if (p.has("inertia_kgm2")) {
      const json& rows = root.at("payload").at("inertia_kgm2");
      if (!rows.is_array() || rows.size() != 3) {
        throw ConfigError("payload.inertia_kgm2", "expected a 3x3 array");
      }
      for (int i = 0; i < 3; ++i) {
        s.payload.inertia.row(i) = ObjectReader::as_vec3(
            rows[static_cast<std::size_t>(i)], "payload.inertia_kgm2[" + std::to_string(i) + "]");
      }
    }
    p.finish();
  }

  s.gravity.g_scalar = r.number("gravity_mps2", kDefaultGravity);

  if (r.has("sensor")) {
    ObjectReader p(root.at("sensor"), "sensor");
    s.sensor.sigma_f = p.number("sigma_f_N", 0.0);
    s.sensor.sigma_tau = p.number("sigma_tau_Nm", 0.0);
    s.sensor.bias_f = p.vec3("bias_f_N", Vec3::Zero());
    s.sensor.bias_tau = p.vec3("bias_tau_Nm", Vec3::Zero());
    if (s.sensor.sigma_f < 0.0) throw ConfigError("sensor.sigma_f_N", "must be >= 0");
    if (s.sensor.sigma_tau < 0.0) throw ConfigError("sensor.sigma_tau_Nm", "must be >= 0");
    p.finish();
  }

  if (r.has("gains")) {
    ObjectReader p(root.at("gains"), "gains");
    s.gains.inertia = p.vec3("M", s.gains.inertia);
    s.gains.damping = p.vec3("B", s.gains.damping);
    s.gains.stiffness = p.vec3("K", s.gains.stiffness);
    for (const auto& [key, v] : {std::pair{"M", s.gains.inertia}, std::pair{"B", s.gains.damping},
                                 std::pair{"K", s.gains.stiffness}}) {
      if (!(v.array() > 0.0).all()) throw ConfigError(std::string("gains.") + key, "must be > 0");
    }
    p.finish();
  }

  s.plan = parse_plan(r.at("plan"));
  s.dt = r.number("dt_s", kDefaultDt);
  s.tracking_lag = r.number("tracking_lag_s", 0.0);

  if (r.has("angular_perturbation") && !root.at("angular_perturbation").is_null()) {
    ObjectReader p(root.at("angular_perturbation"), "angular_perturbation");
    AngularPerturbation ap;
    ap.amplitude = p.number("amp");
    ap.frequency = p.number("freq", ap.frequency);
    ap.axis = p.vec3("axis", ap.axis);
    p.finish();
    s.angular_perturbation = ap;
  }

  {
    const long seed = r.integer("seed", 0);
    if (seed < 0) throw ConfigError("seed", "must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }

  if (r.has("estimation")) {
    ObjectReader p(root.at("estimation"), "estimation");
    auto& e = s.estimation;
    e.guard_eps = p.number("guard_eps_mps2", e.guard_eps);
    e.force_floor = p.number("force_floor_N", e.force_floor);
    e.min_mass_samples = count(p, "min_mass_samples", e.min_mass_samples);
    e.min_offset_samples = count(p, "min_offset_samples", e.min_offset_samples);
    e.resolve_every = count(p, "resolve_every_steps", e.resolve_every);
    e.filter_alpha = p.number("filter_alpha", e.filter_alpha);
    p.finish();
  }

  if (r.has("compensation")) {
    ObjectReader p(root.at("compensation"), "compensation");
    const std::string mode = p.string("mode", "estimated");
    if (mode == "estimated") {
      s.compensation = CompensationMode::kEstimated;
    } else if (mode == "known") {
      s.compensation = CompensationMode::kKnown;
    } else if (mode == "off") {
      s.compensation = CompensationMode::kOff;
    } else {
      throw ConfigError("compensation.mode", "expected estimated, known or off");
    }
    s.mass_scale = p.number("mass_scale", 1.0);
    p.finish();
  }

  {
    const std::string mode = r.string("correction", "mandatory");
    if (mode == "mandatory") {
      s.correction = CorrectionMode::kMandatory;
    } else if (mode == "optional") {
      s.correction = CorrectionMode::kOptional;
    } else if (mode == "off") {
      s.correction = CorrectionMode::kOff;
    } else {
      throw ConfigError("correction", "expected mandatory, optional or off");
    }
  }

  if (r.has("controller")) {
    ObjectReader p(root.at("controller"), "controller");
    s.settle_velocity = p.number("settle_velocity_mps", s.settle_velocity);
    s.waypoint_timeout = p.number("waypoint_timeout_s", s.waypoint_timeout);
    p.finish();
  }

  if (r.has("start_m")) s.start = ObjectReader::as_vec3(root.at("start_m"), "start_m");

  if (r.has("stack_offsets_m")) {
    const json& arr = root.at("stack_offsets_m");
    if (!arr.is_array()) throw ConfigError("stack_offsets_m", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      doc.stack_offsets.push_back(
          ObjectReader::as_vec3(arr[i], "stack_offsets_m[" + std::to_string(i) + "]"));
    }
  }

  r.finish();
  validate(s);
  return doc;
}

ScenarioDocument load_scenario(const std::filesystem::path& path) {
  return parse_scenario(slurp(path));
}

Replay load_replay(const std::filesystem::path& path) {
  const json root = parse_json(slurp(path), "replay");
  ObjectReader r(root, "replay");
  Replay out;
  if (r.has("estimated_correction_mm")) {
    const json& c = root.at("estimated_correction_mm");
    if (!c.is_array() || c.size() != 2) {
      throw ConfigError("replay.estimated_correction_mm", "expected [cx, cy]");
    }
    const double cx = ObjectReader::as_number(c[0], "replay.estimated_correction_mm[0]");
    const double cy = ObjectReader::as_number(c[1], "replay.estimated_correction_mm[1]");
    // correction c = -(r_x, r_y)
    out.estimated_offset = Vec3(-cx / 1000.0, -cy / 1000.0, 0.0);
  }
  if (r.has("actual_tcp_mm")) {
    const json& a = root.at("actual_tcp_mm");
    if (!a.is_array() || a.size() != 2) throw ConfigError("replay.actual_tcp_mm", "expected [x, y]");
    out.actual_tcp_xy =
        Eigen::Vector2d(ObjectReader::as_number(a[0], "replay.actual_tcp_mm[0]") / 1000.0,
                        ObjectReader::as_number(a[1], "replay.actual_tcp_mm[1]") / 1000.0);
  }
  const std::string csv = r.string("wrench_csv", "");
  if (!csv.empty()) {
    std::filesystem::path p(csv);
    if (p.is_relative()) p = path.parent_path() / p;
    out.wrench_stream = read_wrench_stream(p);
  }
  r.finish();
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line) || line.empty()) throw ConfigError("", path.string() + " is empty");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size()) {
      throw ConfigError("", path.string() + ": row " + std::to_string(t.rows.size() + 2) +
                                " has " + std::to_string(row.size()) + " fields, expected " +
                                std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<Wrench> read_wrench_stream(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  static const char* kCols[6] = {"f_meas_x",   "f_meas_y",   "f_meas_z",
                                 "tau_meas_x", "tau_meas_y", "tau_meas_z"};
  std::size_t idx[6];
  for (int c = 0; c < 6; ++c) {
    std::size_t i = 0;
    while (i < t.header.size() && t.header[i] != kCols[c]) ++i;
    if (i == t.header.size()) {
      throw ConfigError("replay.wrench_csv", std::string("missing column ") + kCols[c]);
    }
    idx[c] = i;
  }
  std::vector<Wrench> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Wrench w;
    for (int c = 0; c < 6; ++c) {
      double v = 0.0;
      try {
        v = std::stod(t.rows[r][idx[c]]);
      } catch (const std::exception&) {
        throw ConfigError("replay.wrench_csv",
                          "row " + std::to_string(r + 2) + " column " + kCols[c] + " not numeric");
      }
      (c < 3 ? w.force : w.moment)[c % 3] = v;
    }
    out.push_back(w);
  }
  return out;
}

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"time", "phase"};
    for (const char* sig : {"p_ref", "p_a", "v_a", "p_tcp", "p_ideal", "f_meas", "tau_meas",
                            "f_true", "tau_true", "f_exc"}) {
      for (const char* ax : {"x", "y", "z"}) c.push_back(std::string(sig) + "_" + ax);
    }
    c.emplace_back("m_hat");
    for (const char* variant : {"raw", "filtered"}) {
      for (const char* ax : {"x", "y", "z"}) {
        c.push_back(std::string("r_hat_") + ax + "_" + variant);
      }
    }
    for (const char* ax : {"x", "y", "z"}) c.push_back(std::string("r_true_") + ax);
    return c;
  }();
  return cols;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log) {
  const auto& cols = trajectory_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  std::string line;
  for (const auto& row : log.rows) {
    line.clear();
    line += format_number(row.t);
    line += ',';
    line += to_string(row.phase);
    auto put3 = [&](const Vec3& v) {
      for (int i = 0; i < 3; ++i) {
        line += ',';
        line += format_number(v[i]);
      }
    };
    put3(row.p_ref);
    put3(row.p_a);
    put3(row.v_a);
    put3(row.p_tcp);
    put3(row.p_ideal);
    put3(row.measured.force);
    put3(row.measured.moment);
    put3(row.truth.force);
    put3(row.truth.moment);
    put3(row.f_exc);
    line += ',';
    line += format_number(row.m_hat);
    put3(row.r_hat_raw);
    put3(row.r_hat_filtered);
    put3(row.r_true);
    os << line << '\n';
  }
}

json report_to_json(const SimOutcome& outcome, const Scenario& scenario) {
  const TaskReport& rep = outcome.report;
  json j;
  j["status"] = outcome.completed() ? "completed" : "aborted";
  if (outcome.abort) {
    j["abort_reason"] = to_string(*outcome.abort);
    j["abort_detail"] = outcome.abort_detail;
  }
  j["flags"] = rep.flags;
  if (!outcome.completed()) return j;

  j["mass"] = {{"m_hat_kg", rep.mass_estimate.m_hat},
               {"samples", rep.mass_estimate.sample_count},
               {"valid", rep.mass_estimate.valid}};
  const OffsetEstimate& off = rep.offset_estimate;
  j["offset"] = {{"r_hat_raw_mm", mm3(off.r_hat_raw)},
                 {"r_hat_filtered_mm", mm3(off.r_hat_filtered)},
                 {"r_true_mm", mm3(scenario.payload.com_offset)},
                 {"rank", off.rank},
                 {"identifiable", off.identifiable},
                 {"residual_norm_Nm", off.residual_norm},
                 {"samples", off.sample_count}};
  const PlacementResult& pl = rep.placement;
  j["metrics"] = {{"offset_rmse_x_mm", mm(rep.offset_rmse_x)},
                  {"tcp_rmse_x_mm", mm(rep.tcp_rmse_x)},
                  {"correction_command_error_mm", mm(pl.correction_command_error)},
                  {"release_error_vs_ideal_mm", mm(pl.release_error_vs_ideal)},
                  {"execution_error_mm", mm(pl.execution_error)},
                  {"stable_layers", rep.stable ? 1 : 0}};
  j["placement"] = {{"target_mm", mm3(scenario.plan.place_nominal)},
                    {"ideal_correction_mm", mm2(pl.ideal_correction)},
                    {"estimated_correction_mm", mm2(pl.estimated_correction)},
                    {"ideal_corrected_tcp_mm", mm3(pl.ideal_corrected_tcp)},
                    {"commanded_tcp_mm", mm3(pl.commanded_tcp)},
                    {"actual_tcp_mm", mm3(pl.actual_tcp)},
                    {"object_com_final_x_mm", mm(pl.object_com_final_x)},
                    {"support_x_mm", mm(scenario.plan.support_x)},
                    {"margin_mm", mm(rep.margin)},
                    {"stable", rep.stable},
                    {"correction_applied", rep.correction_applied}};
  j["objects"] = json::array({{{"object", 1},
                               {"actual_com_x_mm", mm(scenario.payload.com_offset.x())},
                               {"estimated_com_x_mm", mm(off.r_hat_filtered.x())},
                               {"implemented_com_x_mm", mm(pl.implemented_com_x)},
                               {"stable", rep.stable},
                               {"margin_mm", mm(rep.margin)}}});
  return j;
}

}  // namespace wrenchsim
