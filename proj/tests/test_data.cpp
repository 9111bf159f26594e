#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sgsa/data.hpp"

using namespace sgsa;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "sgsa_data_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("vocabulary assignment is deterministic and handles unknowns") {
    Vocabulary v = Vocabulary::build({kPadToken, kUnkToken}, {{"b", "a"}, {"c", "a"}});
    CHECK(v.size() == 5);
    CHECK(v.id(kPadToken) == 0);
    CHECK(v.id(kUnkToken) == 1);
    CHECK(v.id("a") == 2);  // sorted after reserved
    CHECK(v.id("b") == 3);
    CHECK(v.id("never-seen") == 1);
    Vocabulary g = Vocabulary::build({kNoneGloss}, {{"x"}});
    CHECK_THROWS_AS(g.id("unknown"), ValidationError);
}

TEST_CASE("normalization statistics and round trip") {
    SkeletonTopology topo({{"a", 1}, {"b", 1}, {"c", 1}}, {{0, 1}, {1, 2}}, true);
    std::vector<DatasetRecord> train(1);
    train[0].pose = Tensor{{1.0, 5.0, 0.25, 0.25}, {2.0, 5.0, -0.25, 0.5}, {3.0, 5.0, 0.75, 0.75},
                           {4.0, 5.0, -0.75, 1.0}};
    NormStats stats = compute_norm_stats(train, topo);

    // channel 1 is constant: centered only
    Tensor norm = normalize_pose(train[0].pose, stats);
    for (int u = 0; u < 4; ++u) CHECK(norm(u, 1) == 0.0);

    // non-degenerate channels standardize to mean 0 / var 1 on the split
    for (int c : {0, 2}) {
        double mean = 0.0, var = 0.0;
        for (int u = 0; u < 4; ++u) mean += norm(u, c);
        mean /= 4;
        for (int u = 0; u < 4; ++u) var += (norm(u, c) - mean) * (norm(u, c) - mean);
        var /= 4;
        CHECK(std::abs(mean) < 1e-6);
        CHECK(std::abs(var - 1.0) < 1e-6);
    }

    // counter column passes through
    for (int u = 0; u < 4; ++u) CHECK(norm(u, 3) == train[0].pose(u, 3));

    // invertible
    Tensor back = denormalize_pose(norm, stats);
    for (int u = 0; u < 4; ++u)
        for (int c = 0; c < 4; ++c) CHECK(std::abs(back(u, c) - train[0].pose(u, c)) < 1e-10);
}

TEST_CASE("already standardized channels stay put") {
    SkeletonTopology topo({{"a", 1}}, {}, false);
    std::vector<DatasetRecord> train(1);
    train[0].pose = Tensor{{1.0}, {-1.0}};  // mean 0, std 1
    NormStats stats = compute_norm_stats(train, topo);
    Tensor norm = normalize_pose(train[0].pose, stats);
    CHECK(std::abs(norm(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(norm(1, 0) + 1.0) < 1e-12);
}

TEST_CASE("synthetic corpus construction") {
    SkeletonTopology topo = toy_arm_topology();
    CHECK(topo.width() == 9);

    std::vector<DatasetRecord> a = synth_generate(topo, 12, 99);
    std::vector<DatasetRecord> b = synth_generate(topo, 12, 99);
    REQUIRE(a.size() == 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].text == b[i].text);
        CHECK(std::memcmp(a[i].pose.values().data(), b[i].pose.values().data(),
                          a[i].pose.size() * sizeof(double)) == 0);
        // counter: non-decreasing, ends at exactly 1.0
        const int cc = topo.counter_column();
        double prev = 0.0;
        for (int u = 0; u < a[i].pose.rows(); ++u) {
            CHECK(a[i].pose(u, cc) >= prev);
            prev = a[i].pose(u, cc);
        }
        CHECK(a[i].pose(a[i].pose.rows() - 1, cc) == 1.0);
        CHECK(a[i].gloss_frames.size() == static_cast<std::size_t>(a[i].pose.rows()));
        CHECK(a[i].pose.rows() == static_cast<int>(a[i].text.size()) * 3);
    }
}

TEST_CASE("two-token sentences concatenate their primitives") {
    SkeletonTopology topo = toy_arm_topology();
    // find a two-token record
    std::vector<DatasetRecord> recs = synth_generate(topo, 40, 7);
    const DatasetRecord* two = nullptr;
    for (const auto& r : recs)
        if (r.text.size() == 2) {
            two = &r;
            break;
        }
    REQUIRE(two != nullptr);
    Tensor p0 = synth_primitive(topo, two->text[0]);
    Tensor p1 = synth_primitive(topo, two->text[1]);
    const int cc = topo.counter_column();
    for (int f = 0; f < 3; ++f)
        for (int c = 0; c < topo.width(); ++c) {
            if (c == cc) continue;
            CHECK(two->pose(f, c) == p0(f, c));
            CHECK(two->pose(3 + f, c) == p1(f, c));
        }
}

TEST_CASE("dataset file round trip") {
    SkeletonTopology topo = toy_arm_topology();
    std::vector<DatasetRecord> recs = synth_generate(topo, 6, 3);
    const fs::path path = temp_dir() / "roundtrip.jsonl";
    save_dataset(recs, topo, path.string());
    std::vector<DatasetRecord> loaded = load_dataset(path.string(), topo);
    REQUIRE(loaded.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(loaded[i].text == recs[i].text);
        CHECK(loaded[i].gloss_frames == recs[i].gloss_frames);
        REQUIRE(loaded[i].pose.size() == recs[i].pose.size());
        CHECK(std::memcmp(loaded[i].pose.values().data(), recs[i].pose.values().data(),
                          recs[i].pose.size() * sizeof(double)) == 0);
    }

    // canonical files survive a load/save cycle byte for byte
    const fs::path path2 = temp_dir() / "roundtrip2.jsonl";
    save_dataset(loaded, topo, path2.string());
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("empty dataset file loads as empty") {
    const fs::path path = temp_dir() / "empty.jsonl";
    std::ofstream(path).close();
    SkeletonTopology topo = toy_arm_topology();
    CHECK(load_dataset(path.string(), topo).empty());
}

TEST_CASE("dataset validation names the failing record") {
    SkeletonTopology topo = toy_arm_topology();
    const fs::path path = temp_dir() / "bad.jsonl";
    {
        std::ofstream out(path);
        out << R"({"format":"sgsa-dataset","version":1,"width":9})" << "\n";
        out << R"({"text":["raise"],"pose":[[0,0,0,0,0]]})" << "\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(path.string(), topo), doctest::Contains("record 0"), ValidationError);

    const fs::path path2 = temp_dir() / "bad_gloss.jsonl";
    {
        std::ofstream out(path2);
        out << R"({"format":"sgsa-dataset","version":1,"width":9})" << "\n";
        out << R"({"text":["raise"],"gloss":["raise"],"pose":[[0,0,0,0,0,0,0,0,0.5],[0,0,0,0,0,0,0,0,1.0]]})"
            << "\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(path2.string(), topo), doctest::Contains("misaligned"), ValidationError);

    // numeric overflow is rejected at the JSON layer
    const fs::path path3 = temp_dir() / "bad_nonfinite.jsonl";
    {
        std::ofstream out(path3);
        out << R"({"format":"sgsa-dataset","version":1,"width":9})" << "\n";
        out << R"({"text":["raise"],"pose":[[0,0,0,0,0,0,0,0,1e999]]})" << "\n";
    }
    CHECK_THROWS_AS(load_dataset(path3.string(), topo), ValidationError);

    // in-memory records with non-finite values cannot be written
    DatasetRecord nan_rec;
    nan_rec.text = {"raise"};
    nan_rec.pose = Tensor(1, 9);
    nan_rec.pose(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(save_dataset({nan_rec}, topo, (temp_dir() / "nan.jsonl").string()),
                         doctest::Contains("non-finite"), ValidationError);
}

}  // TEST_SUITE
