#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "roomeq/common.hpp"
#include "roomeq/manifest.hpp"

using namespace roomeq;
namespace fs = std::filesystem;

namespace {

Manifest numbered(std::size_t n) {
    Manifest m;
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "e%04zu", i);
        m.entries.push_back({buf, std::string("/data/") + buf + ".wav",
                             EntryKind::Ir, {}});
    }
    return m;
}

std::set<std::string> ids(const Manifest& m) {
    std::set<std::string> s;
    for (const auto& e : m.entries) s.insert(e.id);
    return s;
}

}  // namespace

TEST_CASE("split into the paper counts") {
    const Manifest m = numbered(1209);
    auto [train, dev, test] = split_manifest(m, 773, 194, 242, 1);
    CHECK(train.size() == 773);
    CHECK(dev.size() == 194);
    CHECK(test.size() == 242);

    const auto a = ids(train), b = ids(dev), c = ids(test);
    std::set<std::string> all;
    all.insert(a.begin(), a.end());
    all.insert(b.begin(), b.end());
    all.insert(c.begin(), c.end());
    CHECK(all.size() == 1209);  // disjoint and covering
    for (const auto& id : b) CHECK(a.count(id) == 0);
    for (const auto& id : c) {
        CHECK(a.count(id) == 0);
        CHECK(b.count(id) == 0);
    }
}

TEST_CASE("degenerate split keeps everything in the first part") {
    const Manifest m = numbered(50);
    auto [a, b, c] = split_manifest(m, 50, 0, 0, 9);
    CHECK(a.size() == 50);
    CHECK(b.size() == 0);
    CHECK(c.size() == 0);
    CHECK(ids(a) == ids(m));
}

TEST_CASE("same seed gives identical partitions") {
    const Manifest m = numbered(300);
    auto [a1, b1, c1] = split_manifest(m, 100, 100, 100, 7);
    auto [a2, b2, c2] = split_manifest(m, 100, 100, 100, 7);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(a1.entries[i].id == a2.entries[i].id);
        CHECK(b1.entries[i].id == b2.entries[i].id);
        CHECK(c1.entries[i].id == c2.entries[i].id);
    }
}

TEST_CASE("count mismatch is an error") {
    const Manifest m = numbered(10);
    CHECK_THROWS_WITH_AS(split_manifest(m, 5, 3, 3, 1), doctest::Contains("counts"),
                         Error);
}

TEST_CASE("manifest JSONL round trip is byte identical") {
    Manifest m = numbered(20);
    m.entries[3].metadata["target_t60"] = "0.73";
    m.entries[5].kind = EntryKind::Speech;

    const auto dir = fs::temp_directory_path() / "roomeq_manifest";
    fs::create_directories(dir);
    const auto p1 = (dir / "m1.jsonl").string();
    const auto p2 = (dir / "m2.jsonl").string();
    save_manifest(m, p1);
    const Manifest back = load_manifest(p1);
    save_manifest(back, p2);

    std::ifstream f1(p1), f2(p2);
    const std::string b1((std::istreambuf_iterator<char>(f1)),
                         std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)),
                         std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    CHECK_FALSE(b1.empty());
}

TEST_CASE("duplicate ids are rejected") {
    Manifest m;
    m.entries.push_back({"a", "/x/a.wav", EntryKind::Ir, {}});
    m.entries.push_back({"a", "/x/b.wav", EntryKind::Ir, {}});
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("duplicate id"), Error);
}

TEST_CASE("directory scan") {
    const auto dir = fs::temp_directory_path() / "roomeq_scan";
    fs::remove_all(dir);
    fs::create_directories(dir / "sub");
    for (const char* name : {"b.wav", "a.wav", "sub/c.WAV", "sub/d.wav", "e.wav"}) {
        std::ofstream(dir / name) << "x";
    }
    std::ofstream(dir / "readme.txt") << "not audio";
    std::ofstream(dir / "sub" / "data.json") << "{}";

    SUBCASE("finds only WAVE files") {
        const Manifest m = scan_directory(dir.string(), EntryKind::Noise);
        CHECK(m.size() == 5);
        for (const auto& e : m.entries) CHECK(e.kind == EntryKind::Noise);
    }
    SUBCASE("deterministic lexicographic order") {
        const Manifest m1 = scan_directory(dir.string(), EntryKind::Ir);
        const Manifest m2 = scan_directory(dir.string(), EntryKind::Ir);
        REQUIRE(m1.size() == m2.size());
        for (std::size_t i = 0; i < m1.size(); ++i) {
            CHECK(m1.entries[i].id == m2.entries[i].id);
        }
        for (std::size_t i = 1; i < m1.size(); ++i) {
            CHECK(m1.entries[i - 1].id < m1.entries[i].id);
        }
    }
    SUBCASE("empty directory gives an empty manifest") {
        const auto empty = dir / "nothing";
        fs::create_directories(empty);
        CHECK(scan_directory(empty.string(), EntryKind::Ir).size() == 0);
    }
    SUBCASE("unreadable root is an error") {
        CHECK_THROWS_AS(scan_directory((dir / "missing").string(), EntryKind::Ir),
                        Error);
    }
}
