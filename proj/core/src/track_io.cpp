#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <Eigen/LU>

#include "mimu/errors.hpp"
#include "mimu/harness.hpp"
#include "mimu/so3.hpp"

namespace mimu {

namespace {

constexpr const char* kGyroHeader = "t,imu,wx,wy,wz";
constexpr const char* kGtHeader = "t,r00,r01,r02,r10,r11,r12,r20,r21,r22";

struct LineSplitter {
  const std::string& line;
  std::size_t pos = 0;
  int line_no;
  int col = 1;

  LineSplitter(const std::string& l, int ln) : line(l), line_no(ln) {}

  std::string_view next(const char* what) {
    if (pos > line.size())
      throw ParseError("line " + std::to_string(line_no) + ", column " +
                       std::to_string(col) + ": missing field '" + what + "'");
    col = static_cast<int>(pos) + 1;
    const std::size_t comma = line.find(',', pos);
    std::string_view field(line.data() + pos,
                           (comma == std::string::npos ? line.size() : comma) - pos);
    pos = (comma == std::string::npos) ? line.size() + 1 : comma + 1;
    return field;
  }

  double next_double(const char* what) {
    const std::string_view f = next(what);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size())
      throw ParseError("line " + std::to_string(line_no) + ", column " +
                       std::to_string(col) + ": bad number in field '" + what + "'");
    return v;
  }

  long next_int(const char* what) {
    const std::string_view f = next(what);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size())
      throw ParseError("line " + std::to_string(line_no) + ", column " +
                       std::to_string(col) + ": bad integer in field '" + what + "'");
    return v;
  }
};

std::string fmt_t(double t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9f", t);
  return buf;
}

std::string fmt_v(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Track load_track(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  Track track;
  track.track_id = base.filename().string();

  // Gyro file.
  {
    std::ifstream in(base / "gyro.csv");
    if (!in) throw IoError("cannot open " + (base / "gyro.csv").string());
    std::string line;
    if (!std::getline(in, line) || line != kGyroHeader)
      throw SchemaError("gyro.csv: expected header '" + std::string(kGyroHeader) + "'");
    std::map<long, GyroTrack> by_imu;
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      LineSplitter split(line, line_no);
      const double t = split.next_double("t");
      const long imu = split.next_int("imu");
      // Sequenced reads: argument evaluation order is unspecified.
      Vec3 w;
      w.x() = split.next_double("wx");
      w.y() = split.next_double("wy");
      w.z() = split.next_double("wz");
      auto& g = by_imu[imu];
      g.imu_id = static_cast<int>(imu);
      if (!g.timestamps.empty() && t <= g.timestamps.back())
        throw MonotonicityError("gyro.csv line " + std::to_string(line_no) +
                                ": non-increasing timestamp for imu " +
                                std::to_string(imu));
      g.timestamps.push_back(t);
      g.omega_meas.push_back(w);
    }
    if (by_imu.empty()) throw SchemaError("gyro.csv: no samples");
    for (auto& [id, g] : by_imu) track.gyro.push_back(std::move(g));
  }

  // Ground-truth file.
  {
    std::ifstream in(base / "gt.csv");
    if (!in) throw IoError("cannot open " + (base / "gt.csv").string());
    std::string line;
    if (!std::getline(in, line) || line != kGtHeader)
      throw SchemaError("gt.csv: expected header '" + std::string(kGtHeader) + "'");
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      LineSplitter split(line, line_no);
      const double t = split.next_double("t");
      Mat3 r;
      static const char* names[9] = {"r00", "r01", "r02", "r10", "r11",
                                     "r12", "r20", "r21", "r22"};
      for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = split.next_double(names[i]);
      const double drift = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
      if (drift >= 1e-6 || r.determinant() < 0.0)
        throw DataError("gt.csv line " + std::to_string(line_no) +
                        ": rotation drift exceeds 1e-6");
      if (drift > 1e-12) r = project_rotation(r);
      if (!track.gt.empty() && t <= track.gt.timestamps.back())
        throw MonotonicityError("gt.csv line " + std::to_string(line_no) +
                                ": non-increasing timestamp");
      track.gt.push_back(t, r);
    }
    if (track.gt.empty()) throw SchemaError("gt.csv: no samples");
  }

  // Optional durations file.
  {
    std::ifstream in(base / "track.txt");
    if (in) {
      std::string key;
      double value;
      while (in >> key >> value) {
        if (key == "aided_secs") track.aided_duration = value;
        else if (key == "open_secs") track.open_loop_duration = value;
        else throw SchemaError("track.txt: unknown key '" + key + "'");
      }
    }
  }

  // Normalize all timestamps to start at zero, preserving relative offsets.
  double t0 = track.gt.timestamps.front();
  for (const auto& g : track.gyro) t0 = std::min(t0, g.timestamps.front());
  for (auto& t : track.gt.timestamps) t -= t0;
  for (auto& g : track.gyro)
    for (auto& t : g.timestamps) t -= t0;

  for (const auto& g : track.gyro) g.validate();
  track.gt.validate();
  return track;
}

void save_track(const std::string& dir, const Track& track) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) throw IoError("cannot create directory " + base.string());

  {
    std::ofstream out(base / "gyro.csv");
    if (!out) throw IoError("cannot write " + (base / "gyro.csv").string());
    out << kGyroHeader << "\n";
    for (const auto& g : track.gyro)
      for (std::size_t k = 0; k < g.size(); ++k)
        out << fmt_t(g.timestamps[k]) << "," << g.imu_id << ","
            << fmt_v(g.omega_meas[k].x()) << "," << fmt_v(g.omega_meas[k].y()) << ","
            << fmt_v(g.omega_meas[k].z()) << "\n";
    if (!out) throw IoError("failed writing gyro.csv");
  }
  {
    std::ofstream out(base / "gt.csv");
    if (!out) throw IoError("cannot write " + (base / "gt.csv").string());
    out << kGtHeader << "\n";
    for (std::size_t k = 0; k < track.gt.size(); ++k) {
      out << fmt_t(track.gt.timestamps[k]);
      const Rotation& r = track.gt.rotations[k];
      for (int i = 0; i < 9; ++i) out << "," << fmt_v(r(i / 3, i % 3));
      out << "\n";
    }
    if (!out) throw IoError("failed writing gt.csv");
  }
  {
    std::ofstream out(base / "track.txt");
    if (!out) throw IoError("cannot write " + (base / "track.txt").string());
    out << "aided_secs " << fmt_v(track.aided_duration) << "\n";
    out << "open_secs " << fmt_v(track.open_loop_duration) << "\n";
  }
}

}  // namespace mimu
