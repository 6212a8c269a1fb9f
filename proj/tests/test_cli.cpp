#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "cqpbb/envelope.hpp"
#include "cqpbb/io.hpp"

using namespace cqpbb;

namespace {

struct Outcome {
  int code = -1;
  std::string out;  // stdout and stderr
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string(CQPBB_CLI_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string temp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("cqpbb_cli_" + name)).string();
}

std::string toy_file() {
  InstanceFile f;
  auto& p = f.raw.problem;
  p.n = 2;
  p.Q = HermitianMatrix::Identity(2, 2);
  p.c = ComplexVector::Zero(2);
  p.c[0] = -1.0;
  p.bounds.assign(2, {1.0, 1.0});
  p.args.assign(2, ArgumentSet::psk(4));
  const std::string path = temp("toy.json");
  write_json_file(path, instance_to_json(f));
  return path;
}

}  // namespace

TEST_CASE("generate writes deterministic instance files") {
  const std::string a = temp("mimo_a.json"), b = temp("mimo_b.json");
  REQUIRE(cli("generate mimo --m 8 --n 6 --mod 4 --snr 15 --seed 1 --out " + a).code == 0);
  REQUIRE(cli("generate mimo --m 8 --n 6 --mod 4 --snr 15 --seed 1 --out " + b).code == 0);
  CHECK(read_json_file(a).dump() == read_json_file(b).dump());
  const auto inst = read_instance_file(a).materialize();
  for (const auto& s : inst.problem.args) CHECK(s == ArgumentSet::psk(4));

  const std::string r = temp("radar.json");
  REQUIRE(cli("generate radar --delta pi/6 --seed 3 --out " + r).code == 0);
  const auto ri = read_instance_file(r);
  CHECK(ri.radar.delta_angle == doctest::Approx(kPi / 6));
  for (const auto& s : ri.materialize().problem.args) CHECK(width_argument(s) == doctest::Approx(kPi / 3));

  const std::string v = temp("vb.json");
  REQUIRE(cli("generate vb --m 5 --n 5 --seed 7 --out " + v).code == 0);
  for (const auto& s : read_instance_file(v).materialize().problem.args) CHECK(s == ArgumentSet::full_circle());

  CHECK(cli("generate mimo --m 2 --n 6").code == 1);
  CHECK(cli("generate radar --delta banana").code == 1);
  CHECK(cli("generate teapot").code == 1);
  CHECK(cli("").code == 1);
}

TEST_CASE("solve in each mode") {
  const std::string in = temp("solve_in.json");
  REQUIRE(cli("generate mimo --seed 4 --out " + in).code == 0);
  const std::string c = temp("csdr.json"), e = temp("ecsdr.json");
  REQUIRE(cli("solve --in " + in + " --relaxation csdr --out " + c).code == 0);
  REQUIRE(cli("solve --in " + in + " --relaxation ecsdr --out " + e).code == 0);
  const auto rc = record_from_json(read_json_file(c));
  const auto re = record_from_json(read_json_file(e));
  CHECK(re.lbd_e >= rc.lbd_c - 1e-7);
  CHECK(rc.solver_status == "optimal");

  const std::string toy = toy_file();
  const auto o = cli("solve --in " + toy + " --verify");
  REQUIRE(o.code == 0);
  const auto rec = record_from_json(Json::parse(o.out));
  CHECK(rec.objval == doctest::Approx(0.0).epsilon(1e-4).scale(1.0));
  CHECK(rec.verification_failures == 0);
  CHECK_FALSE(rec.verification.empty());

  const auto tl = cli("solve --in " + in + " --time-limit 0.001");
  REQUIRE(tl.code == 0);
  const auto tr = record_from_json(Json::parse(tl.out));
  CHECK(tr.status == "time-limit");
  CHECK(tr.final_lower <= tr.objval);

  CHECK(cli("solve --in /nonexistent.json").code == 1);
  CHECK(cli("solve --in " + in + " --relaxation fancy").code == 1);
  CHECK(cli("solve --in " + in + " --epsilon -1").code == 1);
}

TEST_CASE("solve is idempotent apart from timings") {
  const std::string in = temp("idem.json");
  REQUIRE(cli("generate radar --seed 2 --out " + in).code == 0);
  auto strip = [](Json j) {
    for (const char* k : {"time_total", "TimeE", "TimeC"}) j.erase(k);
    return j.dump();
  };
  const auto a = cli("solve --in " + in);
  const auto b = cli("solve --in " + in);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(strip(Json::parse(a.out)) == strip(Json::parse(b.out)));
}

TEST_CASE("oracle") {
  const std::string in = temp("oracle_in.json");
  REQUIRE(cli("generate mimo --m 8 --n 6 --seed 5 --out " + in).code == 0);
  const auto o = cli("oracle --in " + in);
  REQUIRE(o.code == 0);
  const Json j = Json::parse(o.out);
  CHECK(j["points"] == 4096);

  const auto toy = cli("oracle --in " + toy_file());
  REQUIRE(toy.code == 0);
  CHECK(Json::parse(toy.out)["value"].get<double>() == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));

  const std::string r = temp("oracle_radar.json");
  REQUIRE(cli("generate radar --out " + r).code == 0);
  const auto bad = cli("oracle --in " + r);
  CHECK(bad.code == 1);
  CHECK(bad.out.find("oracle requires discrete arguments") != std::string::npos);

  const std::string big = temp("oracle_big.json");
  REQUIRE(cli("generate mimo --m 16 --n 12 --mod 8 --out " + big).code == 0);
  const auto too = cli("oracle --in " + big);
  CHECK(too.code == 1);
  CHECK(too.out.find("68719476736") != std::string::npos);
}

TEST_CASE("bench") {
  const auto empty = cli("bench --suite vb --reps 0");
  CHECK(empty.code == 0);
  const std::string out = temp("bench.json");
  const auto o = cli("bench --suite vb --reps 2 --vb-cell 3,3 --out " + out);
  REQUIRE(o.code == 0);
  CHECK(o.out.find("CldGap") != std::string::npos);
  CHECK(o.out.find("# Iter") != std::string::npos);
  const Json j = read_json_file(out);
  REQUIRE(j["cells"].size() == 1);
  CHECK(j["cells"][0]["reps"] == 2);
  CHECK(j["records"].size() == 2);
  CHECK(cli("bench --suite radar --vb-cell 3,3").code == 1);
  CHECK(cli("bench --suite mimo --mimo-cell 3,3").code == 1);
}
