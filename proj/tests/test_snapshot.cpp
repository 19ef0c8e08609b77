#include <doctest.h>

#include <random>
#include <sstream>

#include "test_util.hpp"
#include "voxmap/snapshot.hpp"

using namespace voxmap;

TEST_CASE("hex encode/decode") {
  const std::vector<std::uint8_t> bytes = {0x00, 0x0f, 0xa5, 0xff};
  CHECK(hex_encode(bytes) == "000fa5ff");
  CHECK(hex_decode("000FA5ff") == bytes);
  CHECK(hex_decode("").empty());
  CHECK_THROWS_AS(hex_decode("abc"), ValidationError);
  CHECK_THROWS_AS(hex_decode("zz"), ValidationError);
}

TEST_CASE("snapshot: header and line layout") {
  VoxelMapConfig c;
  c.voxel_size = 0.5;
  c.table_size_n = 17;
  VoxelMap map(c);
  map.insert_point({42, Vec3(0.1, -2.5, 3.0), {0xde, 0xad}});
  map.insert_point({43, Vec3(9.0, 9.0, 9.0), {}});
  std::ostringstream out;
  save_snapshot(out, map);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "voxelmap-v1 voxel_size=0.5 n=17");
  const std::string body = out.str();
  CHECK(body.find("42 0.10000000000000001 -2.5 3 dead\n") != std::string::npos);
  CHECK(body.find("43 9 9 9 -\n") != std::string::npos);
}

TEST_CASE("snapshot: load reproduces stats and contents") {
  VoxelMapConfig c;
  c.voxel_size = 1.25;
  c.table_size_n = 211;
  VoxelMap map(c);
  std::mt19937_64 rng(17);
  for (PointId i = 0; i < 2000; ++i) {
    std::vector<std::uint8_t> desc(i % 5);
    for (auto& b : desc) b = static_cast<std::uint8_t>(rng());
    map.insert_point({i, voxmap::test::random_vec(rng, -40.0, 40.0), desc});
  }
  std::stringstream buf;
  save_snapshot(buf, map);
  const VoxelMap loaded = load_snapshot(buf);
  CHECK(loaded.voxel_size() == c.voxel_size);
  CHECK(loaded.config().table_size_n == c.table_size_n);
  CHECK(loaded.stats() == map.stats());
  map.for_each_voxel([&](const Voxel& v) {
    const Voxel* w = loaded.query_voxel(v.key);
    REQUIRE(w != nullptr);
    REQUIRE(w->points.size() == v.points.size());
    for (const auto& p : v.points) {
      bool found = false;
      for (const auto& q : w->points) {
        if (q.id == p.id) {
          found = true;
          CHECK(q.position == p.position);
          CHECK(q.description == p.description);
        }
      }
      CHECK(found);
    }
  });
}

TEST_CASE("snapshot: malformed input") {
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return load_snapshot(in);
  };
  CHECK_THROWS_AS(load(""), ValidationError);
  CHECK_THROWS_AS(load("voxelmap-v2 voxel_size=1 n=3\n"), ValidationError);
  CHECK_THROWS_AS(load("voxelmap-v1 voxel_size=abc n=3\n"), ValidationError);
  CHECK_THROWS_AS(load("voxelmap-v1 voxel_size=1 n=3\n1 2 3\n"), ValidationError);
  CHECK_THROWS_AS(load("voxelmap-v1 voxel_size=1 n=3\n1 2 3 4 xyz\n"), ValidationError);
  CHECK_THROWS_AS(load("voxelmap-v1 voxel_size=0 n=3\n"), ValidationError);
  CHECK(load("voxelmap-v1 voxel_size=1 n=3\n\n1 0.5 0.5 0.5 -\n").point_count() == 1);
}
