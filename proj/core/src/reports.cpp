#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mimu/errors.hpp"
#include "mimu/harness.hpp"

namespace mimu {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9e", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

}  // namespace

std::vector<std::string> emit_reports(const PipelineResult& result,
                                      const std::string& out_dir) {
  if (result.methods.empty()) throw EmptyInput("emit_reports: no methods");
  const auto& horizons = result.methods.front().horizons;
  if (horizons.empty()) throw EmptyInput("empty open-loop window: nothing to report");

  namespace fs = std::filesystem;
  const fs::path base(out_dir);
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) throw IoError("cannot create directory " + base.string());

  std::vector<std::string> paths;

  {
    auto out = open_out(base / "error_vs_horizon.csv");
    out << "horizon_s";
    for (const auto& m : result.methods) out << ",median_" << m.method;
    out << "\n";
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      out << fmt(horizons[h]);
      for (const auto& m : result.methods) out << "," << fmt(m.median_error[h]);
      out << "\n";
    }
    paths.push_back((base / "error_vs_horizon.csv").string());
  }

  const bool have_ratios =
      result.methods.size() > 1 &&
      std::any_of(result.methods.begin(), result.methods.end(),
                  [](const MethodReport& m) { return !m.ratio_vs_ave.empty(); });
  if (have_ratios) {
    auto out = open_out(base / "ratio_vs_ave.csv");
    out << "horizon_s";
    for (const auto& m : result.methods)
      if (!m.ratio_vs_ave.empty()) out << ",ratio_" << m.method;
    out << "\n";
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      out << fmt(horizons[h]);
      for (const auto& m : result.methods)
        if (!m.ratio_vs_ave.empty()) out << "," << fmt(m.ratio_vs_ave[h]);
      out << "\n";
    }
    paths.push_back((base / "ratio_vs_ave.csv").string());
  }

  {
    auto out = open_out(base / "per_track_errors.csv");
    out << "method,track_id,horizon_s,error_rad\n";
    for (const auto& m : result.methods)
      for (std::size_t t = 0; t < m.track_ids.size(); ++t)
        for (std::size_t h = 0; h < horizons.size(); ++h)
          out << m.method << "," << m.track_ids[t] << "," << fmt(horizons[h]) << ","
              << fmt(m.errors[t][h]) << "\n";
    paths.push_back((base / "per_track_errors.csv").string());
  }

  {
    auto out = open_out(base / "axis_usage.csv");
    out << "imu,freq_x,freq_y,freq_z\n";
    for (std::size_t i = 0; i < result.usage.frequency.size(); ++i)
      out << i << "," << fmt(result.usage.frequency[i][0]) << ","
          << fmt(result.usage.frequency[i][1]) << ","
          << fmt(result.usage.frequency[i][2]) << "\n";
    paths.push_back((base / "axis_usage.csv").string());
  }

  {
    auto out = open_out(base / "summary.txt");
    const std::size_t n_tracks =
        result.methods.front().track_ids.size();
    out << "tracks " << n_tracks << "\n";
    out << "failures " << result.failures.size() << "\n";
    for (const auto& f : result.failures)
      out << "failed " << f.track_id << " " << f.reason << "\n";
    for (const auto& m : result.methods) {
      out << "method " << m.method;
      for (std::size_t h = 0; h < horizons.size(); ++h)
        out << " " << fmt(horizons[h]) << ":" << fmt(m.median_error[h]);
      out << "\n";
      if (m.ratio_vs_ave.empty()) continue;
      out << "ratio_vs_ave " << m.method;
      for (std::size_t h = 0; h < horizons.size(); ++h)
        out << " " << fmt(horizons[h]) << ":" << fmt(m.ratio_vs_ave[h]);
      out << "\n";
      if (m.method == "BAC") {
        // First horizon where the BAC advantage over AVE is gone.
        double crossover = -1.0;
        for (std::size_t h = 0; h < horizons.size(); ++h) {
          if (horizons[h] > 0.0 && m.ratio_vs_ave[h] < 100.0) {
            crossover = horizons[h];
            break;
          }
        }
        if (crossover >= 0.0)
          out << "bac_advantage_lost_at_s " << fmt(crossover) << "\n";
        else
          out << "bac_advantage_lost_at_s none_within_window\n";
      }
    }
    if (!out) throw IoError("failed writing summary.txt");
    paths.push_back((base / "summary.txt").string());
  }

  return paths;
}

PipelineResult load_report_tables(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  std::ifstream in(base / "per_track_errors.csv");
  if (!in) throw IoError("cannot open " + (base / "per_track_errors.csv").string());
  std::string line;
  if (!std::getline(in, line) || line != "method,track_id,horizon_s,error_rad")
    throw SchemaError("per_track_errors.csv: unexpected header");

  // method -> (track -> (horizon, error) list), preserving first-seen order.
  PipelineResult result;
  std::map<std::string, std::size_t> method_index;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string method, track, field;
    if (!std::getline(ss, method, ',') || !std::getline(ss, track, ','))
      throw ParseError("per_track_errors.csv line " + std::to_string(line_no));
    double horizon = 0.0, error = 0.0;
    if (!std::getline(ss, field, ','))
      throw ParseError("per_track_errors.csv line " + std::to_string(line_no));
    horizon = std::strtod(field.c_str(), nullptr);
    if (!std::getline(ss, field))
      throw ParseError("per_track_errors.csv line " + std::to_string(line_no));
    error = std::strtod(field.c_str(), nullptr);

    auto [it, inserted] = method_index.try_emplace(method, result.methods.size());
    if (inserted) {
      MethodReport rep;
      rep.method = method;
      result.methods.push_back(std::move(rep));
    }
    MethodReport& rep = result.methods[it->second];
    if (rep.track_ids.empty() || rep.track_ids.back() != track) {
      rep.track_ids.push_back(track);
      rep.errors.emplace_back();
    }
    if (rep.track_ids.size() == 1) rep.horizons.push_back(horizon);
    rep.errors.back().push_back(error);
  }
  if (result.methods.empty()) throw EmptyInput("per_track_errors.csv: no rows");
  for (const auto& m : result.methods)
    for (const auto& row : m.errors)
      if (row.size() != m.horizons.size())
        throw SchemaError("per_track_errors.csv: ragged horizon grid");

  std::ifstream usage(base / "axis_usage.csv");
  if (usage) {
    if (!std::getline(usage, line) || line != "imu,freq_x,freq_y,freq_z")
      throw SchemaError("axis_usage.csv: unexpected header");
    while (std::getline(usage, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string field;
      std::array<double, 3> f{};
      std::getline(ss, field, ',');  // imu index, implied by row order
      for (int a = 0; a < 3; ++a) {
        if (!std::getline(ss, field, ','))
          throw ParseError("axis_usage.csv: malformed row '" + line + "'");
        f[a] = std::strtod(field.c_str(), nullptr);
      }
      result.usage.frequency.push_back(f);
    }
  }

  aggregate_method_stats(result);
  return result;
}

}  // namespace mimu
