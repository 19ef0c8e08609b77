#include "voxmap/snapshot.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace voxmap {

namespace {

constexpr std::string_view kMagic = "voxelmap-v1";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
T parse_field(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError("snapshot: bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::string_view strip_prefix(std::string_view token, std::string_view prefix) {
  if (token.substr(0, prefix.size()) != prefix) {
    throw ValidationError("snapshot: expected '" + std::string(prefix) + "' in header");
  }
  return token.substr(prefix.size());
}

}  // namespace

std::string hex_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::vector<std::uint8_t> hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) throw ValidationError("hex_decode: odd length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ValidationError("hex_decode: invalid digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

void write_points(std::ostream& out, double voxel_size, std::size_t table_size_n,
                  const std::vector<MapPoint>& points) {
  out << kMagic << " voxel_size=" << format_double(voxel_size) << " n=" << table_size_n << '\n';
  for (const auto& p : points) {
    out << p.id << ' ' << format_double(p.position.x()) << ' ' << format_double(p.position.y())
        << ' ' << format_double(p.position.z()) << ' '
        << (p.description.empty() ? std::string("-") : hex_encode(p.description)) << '\n';
  }
}

PointFile read_points(std::istream& in) {
  PointFile file;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("snapshot: missing header");
  {
    std::istringstream header(line);
    std::string magic, size_token, n_token;
    header >> magic >> size_token >> n_token;
    if (magic != kMagic) throw ValidationError("snapshot: bad magic '" + magic + "'");
    file.voxel_size = parse_field<double>(strip_prefix(size_token, "voxel_size="), "voxel_size");
    file.table_size_n = parse_field<std::size_t>(strip_prefix(n_token, "n="), "n");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, x, y, z, desc, extra;
    if (!(row >> id >> x >> y >> z >> desc) || (row >> extra)) {
      throw ValidationError("snapshot: malformed line " + std::to_string(line_no));
    }
    MapPoint p;
    p.id = parse_field<PointId>(id, "id");
    p.position = {parse_field<double>(x, "x"), parse_field<double>(y, "y"),
                  parse_field<double>(z, "z")};
    if (desc != "-") p.description = hex_decode(desc);
    file.points.push_back(std::move(p));
  }
  return file;
}

void save_snapshot(std::ostream& out, const VoxelMap& map) {
  std::vector<MapPoint> points;
  points.reserve(map.point_count());
  map.for_each_voxel([&](const Voxel& v) {
    points.insert(points.end(), v.points.begin(), v.points.end());
  });
  write_points(out, map.voxel_size(), map.config().table_size_n, points);
}

VoxelMap load_snapshot(std::istream& in, const VoxelMapConfig& base) {
  PointFile file = read_points(in);
  VoxelMapConfig config = base;
  config.voxel_size = file.voxel_size;
  config.table_size_n = file.table_size_n;
  VoxelMap map(config);
  for (auto& p : file.points) map.insert_point(std::move(p));
  return map;
}

void save_snapshot_file(const std::string& path, const VoxelMap& map) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_snapshot(out, map);
}

VoxelMap load_snapshot_file(const std::string& path, const VoxelMapConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return load_snapshot(in, base);
}

}  // namespace voxmap
