#include "gnglab/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gnglab/format.hpp"

namespace gnglab {

namespace {

namespace fs = std::filesystem;

// ---- parsing ---------------------------------------------------------------

struct Value {
  enum class Kind { Number, String, Bool, Array } kind = Kind::Number;
  double number = 0.0;
  std::string text;
  bool flag = false;
  std::vector<Value> items;
  int line = 0;
  bool used = false;

  const char* kind_name() const {
    switch (kind) {
      case Kind::Number: return "a number";
      case Kind::String: return "a string";
      case Kind::Bool: return "a boolean";
      case Kind::Array: return "an array";
    }
    return "?";
  }
};

struct Section {
  int line = 0;
  std::map<std::string, Value> keys;
};

using Document = std::map<std::string, Section>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void config_error(const std::string& source, int line, const std::string& where,
                               const std::string& msg) {
  std::string text = source;
  if (line > 0) text += ":" + std::to_string(line);
  text += ": ";
  if (!where.empty()) text += where + ": ";
  fail(ErrorCode::Config, text + msg);
}

// Drops a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
      continue;
    }
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

class Parser {
 public:
  Parser(const std::string& source, int line) : source_(source), line_(line) {}

  Value parse_value(const std::string& raw, const std::string& where) {
    pos_ = 0;
    text_ = raw;
    Value v = scalar_or_array(where);
    skip_space();
    if (pos_ != text_.size()) err(where, "unexpected text after value: '" + text_.substr(pos_) + "'");
    return v;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
      ++pos_;
  }

  [[noreturn]] void err(const std::string& where, const std::string& msg) {
    config_error(source_, line_, where, msg);
  }

  Value scalar_or_array(const std::string& where) {
    skip_space();
    Value v;
    v.line = line_;
    if (pos_ >= text_.size()) err(where, "missing value");
    const char c = text_[pos_];
    if (c == '[') {
      ++pos_;
      v.kind = Value::Kind::Array;
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        Value item = scalar_or_array(where);
        if (item.kind == Value::Kind::Array) err(where, "nested arrays are not supported");
        v.items.push_back(std::move(item));
        skip_space();
        if (pos_ >= text_.size()) err(where, "unterminated array");
        if (text_[pos_] == ',') {
          ++pos_;
          skip_space();
          if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        if (text_[pos_] == ']') {
          ++pos_;
          return v;
        }
        err(where, "expected ',' or ']' in array");
      }
    }
    if (c == '"') {
      v.kind = Value::Kind::String;
      ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
          const char e = text_[++pos_];
          v.text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        } else {
          v.text += text_[pos_];
        }
        ++pos_;
      }
      if (pos_ >= text_.size()) err(where, "unterminated string");
      ++pos_;
      return v;
    }
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] != ',' && text_[end] != ']' && text_[end] != ' ' &&
           text_[end] != '\t' && text_[end] != '\n')
      ++end;
    const std::string word = text_.substr(pos_, end - pos_);
    pos_ = end;
    if (word == "true" || word == "false") {
      v.kind = Value::Kind::Bool;
      v.flag = word == "true";
      return v;
    }
    const char* first = word.data();
    const char* last = first + word.size();
    if (!word.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v.number);
    if (ec != std::errc() || ptr != last || word.empty())
      err(where, "cannot parse '" + word + "' as a number, string, boolean or array");
    if (!std::isfinite(v.number)) err(where, "number out of range: '" + word + "'");
    return v;
  }

  const std::string& source_;
  int line_;
  std::string text_;
  std::size_t pos_ = 0;
};

Document parse_document(const std::string& text, const std::string& source) {
  Document doc;
  doc[""].line = 1;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(source, line_no, "", "malformed section header");
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      if (current.empty()) config_error(source, line_no, "", "empty section name");
      if (doc.count(current) && current != "")
        config_error(source, line_no, "[" + current + "]", "duplicate section");
      doc[current].line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(source, line_no, "", "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string where = (current.empty() ? "" : "[" + current + "].") + key;
    if (key.empty()) config_error(source, line_no, "", "missing key before '='");
    std::string value = trim(std::string_view(line).substr(eq + 1));
    // Arrays may continue over several lines.
    const int start_line = line_no;
    auto depth = [](const std::string& s) {
      int d = 0;
      bool quoted = false;
      for (char c : s) {
        if (c == '"') quoted = !quoted;
        if (!quoted && c == '[') ++d;
        if (!quoted && c == ']') --d;
      }
      return d;
    };
    while (depth(value) > 0 && std::getline(in, raw)) {
      ++line_no;
      value += "\n" + trim(strip_comment(raw));
    }
    Section& sec = doc[current];
    if (sec.keys.count(key)) config_error(source, start_line, where, "duplicate key");
    Parser p(source, start_line);
    sec.keys[key] = p.parse_value(value, where);
  }
  return doc;
}

// ---- typed access ----------------------------------------------------------

class Reader {
 public:
  Reader(Document& doc, const std::string& source) : doc_(doc), source_(source) {}

  bool has_section(const std::string& s) const { return doc_.count(s) > 0; }

  int section_line(const std::string& s) const {
    auto it = doc_.find(s);
    return it == doc_.end() ? 0 : it->second.line;
  }

  Value* find(const std::string& sec, const std::string& key) {
    auto it = doc_.find(sec);
    if (it == doc_.end()) return nullptr;
    auto kt = it->second.keys.find(key);
    if (kt == it->second.keys.end()) return nullptr;
    kt->second.used = true;
    return &kt->second;
  }

  static std::string where(const std::string& sec, const std::string& key) {
    return (sec.empty() ? "" : "[" + sec + "].") + key;
  }

  [[noreturn]] void error(const std::string& sec, const std::string& key, const std::string& msg) {
    const Value* v = peek(sec, key);
    config_error(source_, v ? v->line : section_line(sec), key.empty() ? "[" + sec + "]" : where(sec, key), msg);
  }

  std::optional<double> number(const std::string& sec, const std::string& key) {
    Value* v = find(sec, key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::Number) error(sec, key, std::string("expected a number, got ") + v->kind_name());
    return v->number;
  }

  double number_or(const std::string& sec, const std::string& key, double fallback) {
    return number(sec, key).value_or(fallback);
  }

  double required_number(const std::string& sec, const std::string& key) {
    auto v = number(sec, key);
    if (!v) error(sec, "", "missing required key '" + key + "'");
    return *v;
  }

  std::size_t count_or(const std::string& sec, const std::string& key, std::size_t fallback) {
    auto v = number(sec, key);
    if (!v) return fallback;
    if (*v < 0 || *v != std::floor(*v) || *v > 1e9) error(sec, key, "expected a non-negative integer");
    return static_cast<std::size_t>(*v);
  }

  std::optional<std::string> string(const std::string& sec, const std::string& key) {
    Value* v = find(sec, key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::String) error(sec, key, std::string("expected a string, got ") + v->kind_name());
    return v->text;
  }

  bool boolean_or(const std::string& sec, const std::string& key, bool fallback) {
    Value* v = find(sec, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::Bool) error(sec, key, std::string("expected a boolean, got ") + v->kind_name());
    return v->flag;
  }

  std::optional<std::vector<double>> numbers(const std::string& sec, const std::string& key) {
    Value* v = find(sec, key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::Array) error(sec, key, std::string("expected an array, got ") + v->kind_name());
    std::vector<double> out;
    for (const Value& item : v->items) {
      if (item.kind != Value::Kind::Number) error(sec, key, "array elements must be numbers");
      out.push_back(item.number);
    }
    return out;
  }

  std::optional<std::pair<double, double>> pair(const std::string& sec, const std::string& key) {
    auto v = numbers(sec, key);
    if (!v) return std::nullopt;
    if (v->size() != 2) error(sec, key, "expected an array of two numbers");
    return std::pair{(*v)[0], (*v)[1]};
  }

  // Rejects sections and keys nobody asked for, so typos do not pass silently.
  void reject_unused(const std::vector<std::string>& known_sections) {
    for (auto& [name, sec] : doc_) {
      if (!name.empty() &&
          std::find(known_sections.begin(), known_sections.end(), name) == known_sections.end())
        config_error(source_, sec.line, "[" + name + "]", "unknown section");
      for (auto& [key, v] : sec.keys)
        if (!v.used) config_error(source_, v.line, where(name, key), "unknown key");
    }
  }

 private:
  const Value* peek(const std::string& sec, const std::string& key) const {
    auto it = doc_.find(sec);
    if (it == doc_.end()) return nullptr;
    auto kt = it->second.keys.find(key);
    return kt == it->second.keys.end() ? nullptr : &kt->second;
  }

  Document& doc_;
  const std::string& source_;
};

// Runs a factory, turning its validation failure into a located Config error.
template <class F>
auto build(Reader& r, const std::string& sec, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    r.error(sec, key, e.what());
  }
}

ModelSpec read_model(Reader& r) {
  if (!r.has_section("model")) r.error("model", "", "missing section");
  const auto type = r.string("model", "type");
  if (!type) r.error("model", "", "missing required key 'type'");
  if (*type == "curie_weiss") {
    const double beta = r.number_or("model", "beta", 0.0);
    const double h = r.number_or("model", "h", 0.0);
    return build(r, "model", "beta", [&] { return ModelSpec::curie_weiss(beta, h); });
  }
  if (*type == "diffusion") {
    auto coeffs = r.numbers("model", "potential");
    const auto well = r.number("model", "double_well");
    if (coeffs.has_value() == well.has_value())
      r.error("model", "type", "diffusion needs exactly one of 'potential' or 'double_well'");
    if (well) coeffs = double_well(*well);
    return build(r, "model", coeffs && !well ? "potential" : "double_well",
                 [&] { return ModelSpec::diffusion(*coeffs); });
  }
  r.error("model", "type", "unknown model type '" + *type + "' (curie_weiss, diffusion)");
}

RateFunctionSpec read_rate(Reader& r) {
  if (!r.has_section("rate0")) r.error("rate0", "", "missing section");
  const auto type = r.string("rate0", "type");
  if (!type) r.error("rate0", "", "missing required key 'type'");
  if (*type == "cw_entropy") {
    const double alpha = r.required_number("rate0", "alpha");
    const double theta = r.number_or("rate0", "theta", 0.0);
    return build(r, "rate0", "alpha", [&] { return RateFunctionSpec::cw_entropy(alpha, theta); });
  }
  if (*type == "polynomial") {
    auto coeffs = r.numbers("rate0", "coeffs");
    const auto well = r.number("rate0", "double_well");
    if (coeffs.has_value() == well.has_value())
      r.error("rate0", "type", "polynomial needs exactly one of 'coeffs' or 'double_well'");
    if (well) coeffs = double_well(*well);
    return build(r, "rate0", well ? "double_well" : "coeffs",
                 [&] { return RateFunctionSpec::polynomial(*coeffs); });
  }
  if (*type == "tabulated") {
    auto xs = r.numbers("rate0", "xs");
    auto vs = r.numbers("rate0", "values");
    auto ds = r.numbers("rate0", "derivs");
    if (!xs || !vs || !ds) r.error("rate0", "type", "tabulated needs 'xs', 'values' and 'derivs'");
    const double thr = r.number_or("rate0", "slope_threshold", 5.0);
    return build(r, "rate0", "xs",
                 [&] { return RateFunctionSpec::tabulated(*xs, *vs, *ds, thr); });
  }
  r.error("rate0", "type",
          "unknown rate type '" + *type + "' (cw_entropy, polynomial, tabulated)");
}

std::vector<double> read_times(Reader& r) {
  if (!r.has_section("times")) r.error("times", "", "missing section");
  std::vector<double> times;
  if (auto v = r.numbers("times", "values")) {
    times = *v;
    if (r.find("times", "start") || r.find("times", "stop") || r.find("times", "step"))
      r.error("times", "values", "give either 'values' or 'start'/'stop'/'step', not both");
  } else {
    const double start = r.number_or("times", "start", 0.0);
    const auto stop = r.number("times", "stop");
    const auto step = r.number("times", "step");
    if (!stop || !step) r.error("times", "", "needs 'values' or 'stop' and 'step'");
    if (!(*step > 0.0)) r.error("times", "step", "must be > 0");
    if (*stop < start) r.error("times", "stop", "must be >= start");
    const long n = std::lround(std::floor((*stop - start) / *step + 1e-9));
    if (n > 1'000'000) r.error("times", "step", "too many times");
    for (long k = 0; k <= n; ++k) times.push_back(start + k * *step);
  }
  const std::string key = r.find("times", "values") ? "values" : "";
  if (times.empty()) r.error("times", key, "times must not be empty");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0)) r.error("times", key, "times must be >= 0");
    if (k > 0 && !(times[k] > times[k - 1])) r.error("times", key, "times must be increasing");
  }
  return times;
}

std::optional<OrderRegion> read_certificate(Reader& r) {
  const auto kind = r.string("analysis", "certificate");
  const auto corner = r.pair("analysis", "certificate_corner");
  if (!kind) {
    if (corner) r.error("analysis", "certificate_corner", "given without 'certificate'");
    return std::nullopt;
  }
  OrderRegion region;
  if (*kind == "whole") region.kind = RegionKind::Whole;
  else if (*kind == "upper_right") region.kind = RegionKind::UpperRight;
  else if (*kind == "lower_left") region.kind = RegionKind::LowerLeft;
  else r.error("analysis", "certificate", "expected whole, upper_right or lower_left");
  if (region.kind != RegionKind::Whole) {
    if (!corner) r.error("analysis", "certificate", "quadrants need 'certificate_corner = [y, q]'");
    region.y = corner->first;
    region.q = corner->second;
  }
  return region;
}

// ---- running ---------------------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) fail(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

std::string drop_header(const std::string& csv) {
  const auto nl = csv.find('\n');
  return nl == std::string::npos ? std::string() : csv.substr(nl + 1);
}

// Up to `k` evenly spread indices out of n.
std::vector<std::size_t> spread(std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  if (n == 0) return out;
  if (n <= k) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t j = 0; j < k; ++j) out.push_back(j * (n - 1) / (k - 1));
  return out;
}

template <class F>
auto stage(const std::string& name, const char* what, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(e.code(), "scenario '" + name + "': " + what + ": " + e.what());
  }
}

Json error_entry(const Error& e) {
  return {{"applicable", false}, {"error", error_code_name(e.code())}, {"reason", e.what()}};
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
  Document doc = parse_document(text, source);
  Reader r(doc, source);
  ScenarioConfig c;
  c.name = r.string("", "name").value_or("scenario");
  c.description = r.string("", "description").value_or("");
  c.model = read_model(r);
  c.rate0 = read_rate(r);
  c.times = read_times(r);

  c.sampling.n = r.count_or("grid", "n", c.sampling.n);
  if (c.sampling.n < 64) r.error("grid", "n", "must be >= 64 for rate reconstruction runs");
  c.sampling.margin = r.number_or("grid", "margin", c.sampling.margin);
  if (!(c.sampling.margin > 0.0 && c.sampling.margin < 0.5)) r.error("grid", "margin", "must lie in (0, 0.5)");
  c.sampling.p_window = r.number_or("grid", "p_window", c.sampling.p_window);
  if (!(c.sampling.p_window > 0.0)) r.error("grid", "p_window", "must be > 0");
  c.grid_points = r.count_or("grid", "points", c.grid_points);
  if (c.grid_points < 2) r.error("grid", "points", "must be >= 2");
  const auto lo = r.number("grid", "lo");
  const auto hi = r.number("grid", "hi");
  if (lo.has_value() != hi.has_value()) r.error("grid", lo ? "lo" : "hi", "'lo' and 'hi' go together");
  if (lo) {
    if (!(*lo < *hi)) r.error("grid", "hi", "must exceed 'lo'");
    const Interval ss = c.model.state_space();
    if (!(ss.contains_open(*lo) && ss.contains_open(*hi)))
      r.error("grid", "lo", "window must lie inside the open state space");
    c.window = Interval{*lo, *hi};
  }

  c.integrator.rel_tol = r.number_or("integrator", "rel_tol", c.integrator.rel_tol);
  c.integrator.abs_tol = r.number_or("integrator", "abs_tol", c.integrator.abs_tol);
  c.integrator.max_step = r.number_or("integrator", "max_step", c.integrator.max_step);
  c.integrator.p_cap = r.number_or("integrator", "p_cap", c.integrator.p_cap);
  c.integrator.boundary_margin =
      r.number_or("integrator", "boundary_margin", c.integrator.boundary_margin);
  build(r, "integrator", "", [&] {
    c.integrator.validate();
    return 0;
  });

  ScenarioAnalysis& a = c.analysis;
  a.thresholds = r.boolean_or("analysis", "thresholds", false);
  a.onset_bracket = r.pair("analysis", "onset_bracket");
  if (a.onset_bracket && !(a.onset_bracket->first >= 0.0 && a.onset_bracket->second > a.onset_bracket->first))
    r.error("analysis", "onset_bracket", "expected [t_lo, t_hi] with 0 <= t_lo < t_hi");
  a.recovery = r.boolean_or("analysis", "recovery", false);
  a.loop = r.boolean_or("analysis", "loop", false);
  a.loop_between = r.pair("analysis", "loop_between");
  a.loop_e_frac = r.number_or("analysis", "loop_e_frac", a.loop_e_frac);
  if (!(a.loop_e_frac > 0.0 && a.loop_e_frac < 1.0)) r.error("analysis", "loop_e_frac", "must lie in (0, 1)");
  a.compare_times = r.numbers("analysis", "compare_times").value_or(std::vector<double>{});
  for (double t : a.compare_times)
    if (!(t >= 0.0)) r.error("analysis", "compare_times", "times must be >= 0");
  a.dp_steps = r.count_or("analysis", "dp_steps", a.dp_steps);
  if (a.dp_steps < 1) r.error("analysis", "dp_steps", "must be >= 1");
  a.certificate = read_certificate(r);
  a.certificate_samples = r.count_or("analysis", "certificate_samples", a.certificate_samples);

  c.outputs.csv_dir = r.string("outputs", "csv_dir").value_or("");
  c.outputs.json_path = r.string("outputs", "json_path").value_or("");
  c.outputs.svg = r.boolean_or("outputs", "svg", false);

  r.reject_unused({"model", "rate0", "times", "grid", "integrator", "analysis", "outputs"});
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

Json run_scenario(const ScenarioConfig& c, const std::string& base_dir) {
  auto resolve = [&](const std::string& p) -> fs::path {
    if (p.empty()) return {};
    fs::path path(p);
    return base_dir.empty() || path.is_absolute() ? path : fs::path(base_dir) / path;
  };
  const fs::path csv_dir = resolve(c.outputs.csv_dir);
  const fs::path json_path = resolve(c.outputs.json_path);
  const fs::path svg_dir = !csv_dir.empty() ? csv_dir : json_path.parent_path();

  Json report = report_header("scenario");
  report["name"] = c.name;
  report["description"] = c.description;
  report["model"] = to_json(c.model);
  report["rate0"] = to_json(c.rate0);
  report["integrator"] = to_json(c.integrator);
  const Interval win = c.window.value_or(default_grid_window(c.model));
  report["grid"] = {{"samples", c.sampling.n},
                    {"margin", c.sampling.margin},
                    {"p_window", c.sampling.p_window},
                    {"points", c.grid_points},
                    {"window", {win.lo, win.hi}}};

  ScanOptions so;
  so.graph.sampling = c.sampling;
  so.grid_n = c.grid_points;
  so.grid = win;

  std::string push_csv, rate_csv;
  std::vector<PushForward> graphs;
  std::vector<RateProfile> profiles;
  const bool keep = c.outputs.svg && !svg_dir.empty();
  so.observer = [&](const PushForward& pf, const RateProfile* prof) {
    if (!csv_dir.empty()) {
      const std::string pcsv = pushforward_csv(pf);
      push_csv += push_csv.empty() ? pcsv : drop_header(pcsv);
      if (prof) {
        const std::string rcsv = profile_csv(*prof);
        rate_csv += rate_csv.empty() ? rcsv : drop_header(rcsv);
      }
    }
    if (keep) {
      graphs.push_back(pf);
      if (prof) profiles.push_back(*prof);
    }
  };

  const ScenarioTimeline tl = stage(c.name, "scan", [&] {
    return c.analysis.recovery ? recovery_scan(c.model, c.rate0, c.times, c.integrator, so)
                               : scan_timeline(c.model, c.rate0, c.times, c.integrator, so);
  });
  report["timeline"] = to_json(tl);

  if (c.analysis.thresholds) {
    try {
      Json j = to_json(heating_threshold_report(c.model, c.rate0, c.integrator));
      j["applicable"] = true;
      report["thresholds"] = j;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Inapplicable && e.code() != ErrorCode::Precondition) throw;
      report["thresholds"] = error_entry(e);
    }
  }

  if (c.analysis.onset_bracket) {
    const auto [lo, hi] = *c.analysis.onset_bracket;
    Json j = {{"bracket", {lo, hi}}};
    try {
      j["onset"] = overhang_onset(c.model, c.rate0, lo, hi, c.integrator, so.graph);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Bracket) throw;
      j["onset"] = nullptr;
      j["reason"] = e.what();
    }
    report["overhang_onset"] = j;
  }

  if (c.analysis.loop) {
    try {
      Loop loop = stage(c.name, "rotating_loop", [&] {
        return c.analysis.loop_between
                   ? rotating_loop(c.model, c.analysis.loop_between->first,
                                   c.analysis.loop_between->second, c.analysis.loop_e_frac)
                   : rotating_loop(c.model, c.analysis.loop_e_frac);
      });
      loop.period = stage(c.name, "loop_period", [&] {
        return loop_period(c.model, loop, loop.upper[loop.upper.size() / 2], c.integrator);
      });
      report["loop"] = to_json(loop);
      if (!csv_dir.empty()) write_file(csv_dir / "loop.csv", loop_csv(loop));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Inapplicable) throw;
      report["loop"] = error_entry(e);
    }
  }

  if (!c.analysis.compare_times.empty()) {
    const std::vector<double> xs = uniform_grid(win.lo, win.hi, c.grid_points);
    const auto samples = sample_initial_graph(c.rate0, c.sampling);
    Json rows = Json::array();
    std::string csv[3];
    std::vector<RateProfile> shown;
    for (double t : c.analysis.compare_times) {
      const RateProfile env = stage(c.name, "envelope", [&] {
        return envelope(push_graph(c.model, c.rate0, samples, t, c.integrator, so.graph.refine), xs);
      });
      const RateProfile dp = stage(c.name, "hopf_lax_dp", [&] {
        return hopf_lax_dp(c.model, c.rate0, t, xs, c.analysis.dp_steps);
      });
      const RateProfile fd =
          stage(c.name, "hj_fd_solve", [&] { return hj_fd_solve(c.model, c.rate0, t, xs); });
      rows.push_back({{"t", t},
                      {"envelope_vs_dp", linf_distance(env, dp)},
                      {"envelope_vs_fd", linf_distance(env, fd)},
                      {"dp_vs_fd", linf_distance(dp, fd)},
                      {"envelope", profile_summary(env, classify_differentiability(env))},
                      {"hopf_lax_dp", profile_summary(dp, {})},
                      {"finite_difference", profile_summary(fd, {})}});
      const RateProfile* ps[3] = {&env, &dp, &fd};
      for (int k = 0; k < 3; ++k) {
        const std::string s = profile_csv(*ps[k]);
        csv[k] += csv[k].empty() ? s : drop_header(s);
      }
      if (keep && shown.empty()) shown = {env, dp, fd};
    }
    report["comparison"] = rows;
    if (!csv_dir.empty()) {
      write_file(csv_dir / "compare_envelope.csv", csv[0]);
      write_file(csv_dir / "compare_hopf_lax_dp.csv", csv[1]);
      write_file(csv_dir / "compare_finite_difference.csv", csv[2]);
    }
    if (keep)
      write_file(svg_dir / "rate_compare.svg",
                 svg_rate_profiles(shown, c.name + ": three reconstructions"));
  }

  if (c.analysis.certificate) {
    const OrderRegion& region = *c.analysis.certificate;
    report["certificate"] = to_json(
        region, stage(c.name, "order_preservation_certificate", [&] {
          return order_preservation_certificate(c.model, region, c.analysis.certificate_samples);
        }));
  }

  if (!csv_dir.empty()) {
    write_file(csv_dir / "pushforward.csv", push_csv);
    write_file(csv_dir / "rate_envelope.csv", rate_csv);
  }
  if (keep) {
    std::vector<PushForward> g;
    for (std::size_t i : spread(graphs.size(), 6)) g.push_back(graphs[i]);
    write_file(svg_dir / "pushforward.svg", svg_pushforward(g, c.name + ": pushed graph"));
    std::vector<RateProfile> p;
    for (std::size_t i : spread(profiles.size(), 6)) p.push_back(profiles[i]);
    write_file(svg_dir / "rate_profiles.svg", svg_rate_profiles(p, c.name + ": envelope"));
  }
  if (!json_path.empty()) write_file(json_path, dump_json(report));
  return report;
}

}  // namespace gnglab
