#include "panelcp/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace panelcp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::invalid_argument("config: non-numeric value for " + key);
  return x;
}

int to_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw std::invalid_argument("config: non-integer value for " + key);
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw std::invalid_argument("config: non-integer value for " + key);
  return x;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw std::invalid_argument("config: expected on/off for " + key);
}

std::vector<double> to_grid(const std::string& v, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(item, key));
  if (out.empty()) throw std::invalid_argument("config: empty grid for " + key);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_auto(double v) { return v < 0.0 ? "auto" : fmt(v); }

std::string fmt_grid(const std::vector<double>& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) out += ",";
    out += fmt(grid[i]);
  }
  return out;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  const auto opt = [&](double* field) { *field = v == "auto" ? -1.0 : to_double(v, key); };

  if (key == "general.dataset") dataset = v;
  else if (key == "general.panel_path") panel_path = v;
  else if (key == "general.out_dir") out_dir = v;
  else if (key == "general.threads") threads = to_int(v, key);
  else if (key == "general.replications") replications = to_int(v, key);
  else if (key == "general.seed") seed = to_u64(v, key);
  else if (key == "general.structure_seed") structure_seed = to_u64(v, key);
  else if (key == "general.tail_frac") tail_frac = to_double(v, key);
  else if (key == "split.n_calib") n_calib = to_int(v, key);
  else if (key == "split.n_test") n_test = to_int(v, key);
  else if (key == "split.stratified") stratified = v;
  else if (key == "split.burn_in") burn_in = to_int(v, key);
  else if (key == "methods.list") methods = split_list(v);
  else if (key == "methods.alpha") alpha = to_double(v, key);
  else if (key == "methods.h") h = to_double(v, key);
  else if (key == "methods.gamma") gamma = to_double(v, key);
  else if (key == "methods.ridge_lambda") ridge_lambda = to_double(v, key);
  else if (key == "methods.tqa_b_decay") tqa_b_decay = to_double(v, key);
  else if (key == "methods.tqa_b_budget") opt(&tqa_b_budget);
  else if (key == "methods.lpci_refit_every") lpci_refit_every = to_int(v, key);
  else if (key == "methods.lpci_window") lpci_window = to_int(v, key);
  else if (key == "methods.lpci_lags") lpci_lags = to_int(v, key);
  else if (key == "methods.lpci_ewm_alpha") lpci_ewm_alpha = to_double(v, key);
  else if (key == "methods.lpci_beta") opt(&lpci_beta);
  else if (key == "feedback.mode") feedback_mode = v;
  else if (key == "feedback.p") p = to_double(v, key);
  else if (key == "feedback.direction") direction = v;
  else if (key == "sweep.axis") sweep_axis = v;
  else if (key == "sweep.p_grid") p_grid = to_grid(v, key);
  else if (key == "sweep.h_grid") h_grid = to_grid(v, key);
  else if (key == "sweep.gamma_grid") gamma_grid = to_grid(v, key);
  else if (key == "output.write_traces") write_traces = to_bool(v, key);
  else if (key == "output.write_figures") write_figures = to_bool(v, key);
  else throw std::invalid_argument("config: unknown key " + key);
}

std::string ExperimentConfig::to_string() const {
  std::ostringstream out;
  out << "[general]\n";
  out << "dataset = " << dataset << "\n";
  out << "panel_path = " << panel_path << "\n";
  out << "out_dir = " << out_dir << "\n";
  out << "threads = " << threads << "\n";
  out << "replications = " << replications << "\n";
  out << "seed = " << seed << "\n";
  out << "structure_seed = " << structure_seed << "\n";
  out << "tail_frac = " << fmt(tail_frac) << "\n";
  out << "\n[split]\n";
  out << "n_calib = " << n_calib << "\n";
  out << "n_test = " << n_test << "\n";
  out << "stratified = " << stratified << "\n";
  out << "burn_in = " << burn_in << "\n";
  out << "\n[methods]\n";
  out << "list = ";
  for (std::size_t i = 0; i < methods.size(); ++i) out << (i ? "," : "") << methods[i];
  out << "\n";
  out << "alpha = " << fmt(alpha) << "\n";
  out << "h = " << fmt(h) << "\n";
  out << "gamma = " << fmt(gamma) << "\n";
  out << "ridge_lambda = " << fmt(ridge_lambda) << "\n";
  out << "tqa_b_decay = " << fmt(tqa_b_decay) << "\n";
  out << "tqa_b_budget = " << fmt_auto(tqa_b_budget) << "\n";
  out << "lpci_refit_every = " << lpci_refit_every << "\n";
  out << "lpci_window = " << lpci_window << "\n";
  out << "lpci_lags = " << lpci_lags << "\n";
  out << "lpci_ewm_alpha = " << fmt(lpci_ewm_alpha) << "\n";
  out << "lpci_beta = " << fmt_auto(lpci_beta) << "\n";
  out << "\n[feedback]\n";
  out << "mode = " << feedback_mode << "\n";
  out << "p = " << fmt(p) << "\n";
  out << "direction = " << direction << "\n";
  out << "\n[sweep]\n";
  out << "axis = " << sweep_axis << "\n";
  out << "p_grid = " << fmt_grid(p_grid) << "\n";
  out << "h_grid = " << fmt_grid(h_grid) << "\n";
  out << "gamma_grid = " << fmt_grid(gamma_grid) << "\n";
  out << "\n[output]\n";
  out << "write_traces = " << (write_traces ? "on" : "off") << "\n";
  out << "write_figures = " << (write_figures ? "on" : "off") << "\n";
  return out.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: bad section header at line " +
                                    std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    if (section.empty())
      throw std::invalid_argument("config: key outside any section at line " +
                                  std::to_string(line_no));
    cfg.set(section + "." + key, line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << to_string();
}

void ExperimentConfig::validate() const {
  if (dataset != "easy" && dataset != "medium" && dataset != "hard" && dataset != "csv")
    throw std::invalid_argument("config: dataset must be easy, medium, hard, or csv");
  if (dataset == "csv" && panel_path.empty())
    throw std::invalid_argument("config: csv dataset needs panel_path");
  if (methods.empty()) throw std::invalid_argument("config: empty method list");
  method_kinds();  // rejects unknown names
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("config: alpha must lie in (0, 1)");
  if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("config: p outside [0, 1]");
  if (feedback_mode != "full" && feedback_mode != "mcar" && feedback_mode != "informative")
    throw std::invalid_argument("config: feedback mode must be full, mcar, or informative");
  if (direction != "hard_visible" && direction != "easy_visible")
    throw std::invalid_argument("config: direction must be hard_visible or easy_visible");
  if (sweep_axis != "none" && sweep_axis != "p" && sweep_axis != "h" && sweep_axis != "gamma")
    throw std::invalid_argument("config: sweep axis must be none, p, h, or gamma");
  if (stratified != "auto" && stratified != "on" && stratified != "off")
    throw std::invalid_argument("config: stratified must be auto, on, or off");
  if (p_grid.empty() || h_grid.empty() || gamma_grid.empty())
    throw std::invalid_argument("config: sweep grids must be nonempty");
  if (dataset == "csv") {
    if (n_calib < 0 || n_test < 0)
      throw std::invalid_argument("config: csv dataset needs split.n_calib and split.n_test");
    if (burn_in < 0)
      throw std::invalid_argument("config: csv dataset needs split.burn_in");
  }
}

std::vector<MethodKind> ExperimentConfig::method_kinds() const {
  std::vector<MethodKind> kinds;
  std::set<std::string> seen;
  for (const auto& name : methods) {
    if (!seen.insert(name).second)
      throw std::invalid_argument("config: duplicate method " + name);
    kinds.push_back(method_kind_from_name(name));
  }
  return kinds;
}

MethodConfig ExperimentConfig::method_config(MethodKind kind) const {
  MethodConfig mc;
  mc.kind = kind;
  mc.alpha = alpha;
  mc.h = h;
  mc.gamma = gamma;
  mc.tqa_b_decay = tqa_b_decay;
  mc.tqa_b_budget = tqa_b_budget;
  mc.lpci_refit_every = lpci_refit_every;
  mc.lpci_window = lpci_window;
  mc.lpci_lags = lpci_lags;
  mc.lpci_ewm_alpha = lpci_ewm_alpha;
  mc.lpci_beta = lpci_beta;
  return mc;
}

std::string ExperimentConfig::file_prefix() const {
  return dataset + "_" + (sweep_axis == "none" ? "full" : sweep_axis);
}

}  // namespace panelcp
