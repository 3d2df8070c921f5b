#include "delaygp/csv_io.hpp"

#include "delaygp/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace delaygp {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_real(const std::string& s) {
  if (s == "nan") return std::nan("");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: " + s);
  }
  if (used != s.size()) throw InvalidArgument("not a number: " + s);
  return v;
}

std::string sweep_label(double v) {
  std::string s = format_real(v);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
    if (c == '+') c = 'P';
  }
  return s;
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string results_csv(const ResultTable& table) {
  std::ostringstream os;
  os << "series,sweep,rep,seed,max_error,error_bound,evaluated,selected\n";
  for (const ResultRecord& r : table.records) {
    os << r.series << ',' << format_real(r.sweep) << ',' << r.rep << ',' << r.seed << ',' << format_real(r.max_error)
       << ',' << format_real(r.error_bound) << ',' << r.evaluated << ',' << r.selected << '\n';
  }
  return os.str();
}

std::string aggregate_csv(const std::vector<Aggregate>& rows) {
  std::ostringstream os;
  os << "series,sweep,count,mean_max_error,min_max_error,max_max_error,evaluated,selected\n";
  for (const Aggregate& a : rows) {
    os << a.series << ',' << format_real(a.sweep) << ',' << a.count << ',' << format_real(a.mean) << ','
       << format_real(a.min) << ',' << format_real(a.max) << ',' << a.evaluated << ',' << a.selected << '\n';
  }
  return os.str();
}

std::string trace_csv(const SimTrace& trace) {
  std::ostringstream os;
  const Eigen::Index s = trace.state.empty() ? 0 : trace.state.front().size();
  const Eigen::Index n = trace.compensation.empty() ? 0 : trace.compensation.front().size();
  os << "time,error_norm";
  for (Eigen::Index i = 0; i < s; ++i) os << ",x" << i + 1;
  for (Eigen::Index i = 0; i < s; ++i) os << ",xd" << i + 1;
  for (Eigen::Index i = 0; i < n; ++i) os << ",f_hat" << i + 1;
  os << ",data_size\n";
  for (std::size_t k = 0; k < trace.time.size(); ++k) {
    os << format_real(trace.time[k]) << ',' << format_real(trace.error_norm[k]);
    for (Eigen::Index i = 0; i < s; ++i) os << ',' << format_real(trace.state[k](i));
    for (Eigen::Index i = 0; i < s; ++i) os << ',' << format_real(trace.reference[k](i));
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_real(trace.compensation[k](i));
    os << ',' << trace.data_size[k] << '\n';
  }
  return os.str();
}

std::string delta_tilde_csv(const std::vector<DeltaTildeRow>& rows) {
  std::ostringstream os;
  os << "delta_bar,delta_tilde,online_mean_max_error,offline_mean_max_error,online_min_max_error,online_max_max_error\n";
  for (const DeltaTildeRow& r : rows) {
    os << format_real(r.delta_bar) << ',' << format_real(r.delta_tilde) << ',' << format_real(r.online_mean) << ','
       << format_real(r.offline_mean) << ',' << format_real(r.online_min) << ',' << format_real(r.online_max) << '\n';
  }
  return os.str();
}

ResultTable parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "series,sweep,rep,seed,max_error,error_bound,evaluated,selected") {
    throw InvalidArgument("unexpected results header");
  }
  ResultTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 8) throw InvalidArgument("results row must have 8 cells: " + line);
    ResultRecord r;
    r.series = cells[0];
    r.sweep = parse_real(cells[1]);
    r.rep = std::stoi(cells[2]);
    r.seed = std::stoull(cells[3]);
    r.max_error = parse_real(cells[4]);
    r.error_bound = parse_real(cells[5]);
    r.evaluated = std::stoull(cells[6]);
    r.selected = std::stoull(cells[7]);
    table.records.push_back(r);
  }
  return table;
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> write_experiment(const std::string& dir, const ExperimentOutput& out) {
  const std::filesystem::path base(dir);
  std::vector<std::string> written;
  auto put = [&](const std::filesystem::path& p, const std::string& content) {
    write_file(p.string(), content);
    written.push_back(p.string());
  };
  put(base / "results.csv", results_csv(out.table));
  put(base / "aggregate.csv", aggregate_csv(out.table.aggregate()));
  for (const NamedTrace& t : out.traces) {
    put(base / "traces" / (t.series + "_" + sweep_label(t.sweep) + ".csv"), trace_csv(t.trace));
  }
  return written;
}

}  // namespace delaygp
