#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "cqpbb/io.hpp"
#include "support.hpp"

using namespace cqpbb;
using namespace testing;

namespace {

InstanceFile round_trip(const InstanceFile& f) { return instance_from_json(Json::parse(instance_to_json(f).dump())); }

}  // namespace

TEST_CASE("generator specs round trip") {
  InstanceFile m;
  m.kind = "mimo";
  m.mimo = {15, 10, 8, 12.5, 42};
  const auto m2 = round_trip(m);
  CHECK(m2.kind == "mimo");
  CHECK(instance_to_json(m2).dump() == instance_to_json(m).dump());
  CHECK(m2.materialize().problem == m.materialize().problem);

  InstanceFile r;
  r.kind = "radar";
  r.radar.delta_angle = kPi / 3;
  r.radar.rho = 0.37;
  r.radar.seed = 9;
  const auto r2 = round_trip(r);
  CHECK(r2.radar.rho.value() == 0.37);
  CHECK(r2.radar.delta_angle == kPi / 3);
  CHECK(r2.materialize().problem == r.materialize().problem);

  InstanceFile v;
  v.kind = "vb";
  v.vb = {4, 3, {1.0, 0.5, 2.0}, 11};
  CHECK(round_trip(v).materialize().problem == v.materialize().problem);
}

TEST_CASE("explicit problems round trip exactly") {
  std::mt19937_64 g(1);
  for (int t = 0; t < 20; ++t) {
    InstanceFile f;
    f.raw.problem = random_discrete_problem(g, 1 + t % 6, 3 + t % 5);
    f.raw.problem.args[0] = ArgumentSet::interval(0.1 * t, 0.1 * t + 1.0 / 3.0);
    f.raw.problem.bounds[0] = {0.1, std::sqrt(2.0)};
    f.raw.display_scale = -1.0;
    f.raw.display_offset = 1.0 / 7.0;
    const auto back = round_trip(f);
    CHECK(back.kind == "raw-cqp");
    CHECK(back.raw.problem == f.raw.problem);
    CHECK(back.raw.display_offset == f.raw.display_offset);
    CHECK(instance_id(back) == instance_id(f));
  }
}

TEST_CASE("instance ids distinguish instances") {
  InstanceFile a;
  a.kind = "mimo";
  InstanceFile b = a;
  b.mimo.seed = 2;
  CHECK(instance_id(a) != instance_id(b));
  CHECK(instance_id(a).size() == 16);
}

TEST_CASE("malformed input names the problem") {
  CHECK_THROWS_AS(instance_from_json(Json::parse(R"({"format": "other"})")), std::runtime_error);
  CHECK_THROWS_WITH(instance_from_json(Json::parse(R"({"format": "cqpbb-instance", "version": 1})")),
                    doctest::Contains("kind"));
  std::mt19937_64 g(3);
  InstanceFile good;
  good.raw.problem = random_discrete_problem(g, 2, 4);
  Json j = instance_to_json(good);
  j["problem"]["Q"][0][1] = Json::array({5.0, 1.0});
  CHECK_THROWS_WITH(instance_from_json(j), doctest::Contains("Hermitian"));
  CHECK_THROWS_AS(read_instance_file("/nonexistent/file.json"), std::runtime_error);
}

TEST_CASE("result records round trip with non-finite values") {
  ResultRecord r;
  r.instance_id = "abc";
  r.kind = "mimo";
  r.spec = Json{{"x", 1}};
  r.mode = "bb";
  r.status = "epsilon-optimal";
  r.objval = 1.25;
  r.lbd_e = 1.0;
  r.lbd_c = std::nan("");
  r.cld_gap = 100.0;
  r.k_bound = INFINITY;
  r.iterations = 7;
  r.verification.push_back({3, "lemma1", true, 0.5, 1.0, ""});
  const Json j = record_to_json(r);
  CHECK(j["LBdC"].is_null());
  CHECK(j["K"] == "inf");
  const auto back = record_from_json(Json::parse(j.dump()));
  CHECK(std::isnan(back.lbd_c));
  CHECK(std::isinf(back.k_bound));
  CHECK(back.iterations == 7);
  CHECK(back.verification.size() == 1);
  CHECK(record_to_json(back).dump() == j.dump());
}

TEST_CASE("files are written and read back") {
  const std::string path = "cqpbb_io_test.json";
  InstanceFile f;
  f.kind = "vb";
  write_json_file(path, instance_to_json(f));
  CHECK(read_instance_file(path).kind == "vb");
  std::remove(path.c_str());
}
