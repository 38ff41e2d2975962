#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "subpt/trajectory.hpp"

using namespace subpt;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("record appends in order") {
    traj::Trajectory t;
    t.param_dim = 3;
    traj::record(t, {1, 2, 3});
    CHECK(t.rows.size() == 1);
    CHECK(t.rows[0] == std::vector<double>{1, 2, 3});
    for (int k = 0; k < 5; ++k) traj::record(t, {double(k), 0, 0});
    CHECK(t.rows.size() == 6);
    CHECK(t.rows[5][0] == 4.0);

    CHECK_THROWS_AS(traj::record(t, {1, 2}), Error);
    const auto before = t.rows.size();
    CHECK_THROWS_AS(traj::record(t, {1, 2, std::nan("")}), Error);
    CHECK(t.rows.size() == before);
}

TEST_CASE("save/load round-trip is bit-exact and canonical") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    traj::Trajectory t;
    t.param_dim = 5;
    t.fingerprint = "seed=9 test";
    for (int r = 0; r < 3; ++r) {
        std::vector<double> row(5);
        for (double& x : row) x = gauss(rng);
        traj::record(t, row);
    }
    const auto p1 = tmp_path("traj_rt1.txt");
    const auto p2 = tmp_path("traj_rt2.txt");
    traj::save(t, p1);
    auto back = traj::load(p1);
    CHECK(back.param_dim == t.param_dim);
    CHECK(back.fingerprint == t.fingerprint);
    CHECK(back.rows == t.rows);

    traj::save(back, p2);
    CHECK(slurp(p1) == slurp(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("load rejects unknown version") {
    const auto p = tmp_path("traj_badver.txt");
    std::ofstream(p) << "SUBPT-TRAJ 9 1 3\n# x\n1 0 0\n";
    CHECK_THROWS_AS(traj::load(p), Error);
    std::remove(p.c_str());
}

TEST_CASE("golden file parses") {
    const auto p = tmp_path("traj_golden.txt");
    std::ofstream(p) << "SUBPT-TRAJ 1 2 3\n# golden\n1 0 0\n0 1 0\n";
    auto t = traj::load(p);
    CHECK(t.param_dim == 3);
    CHECK(t.rows.size() == 2);
    CHECK(t.rows[0] == std::vector<double>{1, 0, 0});
    CHECK(t.rows[1] == std::vector<double>{0, 1, 0});
    CHECK(t.fingerprint == "golden");
    std::remove(p.c_str());
}

TEST_CASE("load rejects malformed files") {
    const auto p = tmp_path("traj_bad.txt");
    std::ofstream(p) << "WRONG 1 1 3\n# x\n1 0 0\n";
    CHECK_THROWS_AS(traj::load(p), Error);
    std::ofstream(p) << "SUBPT-TRAJ 1 2 3\n# x\n1 0 0\n";  // truncated
    CHECK_THROWS_AS(traj::load(p), Error);
    std::ofstream(p) << "SUBPT-TRAJ 1 1 3\n# x\n1 0\n";  // short row
    CHECK_THROWS_AS(traj::load(p), Error);
    CHECK_THROWS_AS(traj::load(tmp_path("no_such_file_xyz.txt")), Error);
    std::remove(p.c_str());
}
