#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "cleannet/checkpoint.hpp"
#include "cleannet/dataset.hpp"
#include "cleannet/detect.hpp"
#include "cleannet/io.hpp"
#include "cleannet/model.hpp"

#include "oracle.hpp"

using namespace cleannet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cleannet_io_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("feature file round trip") {
    TempDir dir;
    Tensor m = Tensor::matrix(2, 3, {1.5, -2.25, 3.0, 0.0, 42.0, -0.125});
    save_features(dir.file("f.bin"), m);
    Tensor back = load_features(dir.file("f.bin"));
    REQUIRE(back.shape == m.shape);
    for (std::size_t i = 0; i < m.numel(); ++i) CHECK(back.at(i) == m.at(i));
}

TEST_CASE("feature file with zero rows keeps the width") {
    TempDir dir;
    save_features(dir.file("f.bin"), Tensor::zeros({0, 7}));
    Tensor back = load_features(dir.file("f.bin"));
    CHECK(back.rows() == 0);
    CHECK(back.cols() == 7);
}

TEST_CASE("feature loader reports malformed files with byte offsets") {
    TempDir dir;
    save_features(dir.file("f.bin"), Tensor::matrix(2, 2, {1, 2, 3, 4}));
    std::string bytes = slurp(dir.file("f.bin"));

    SECTION("bad magic") {
        bytes[0] = 'X';
        detail::write_file(dir.file("bad.bin"), bytes);
        CHECK_THROWS_AS(load_features(dir.file("bad.bin")), FormatError);
        CHECK_THROWS_WITH(load_features(dir.file("bad.bin")), Catch::Matchers::ContainsSubstring("offset 0"));
    }
    SECTION("truncated payload") {
        detail::write_file(dir.file("trunc.bin"), bytes.substr(0, bytes.size() - 3));
        CHECK_THROWS_WITH(load_features(dir.file("trunc.bin")), Catch::Matchers::ContainsSubstring("truncated"));
    }
    SECTION("bad version") {
        bytes[4] = 9;
        detail::write_file(dir.file("v.bin"), bytes);
        CHECK_THROWS_WITH(load_features(dir.file("v.bin")), Catch::Matchers::ContainsSubstring("version"));
    }
    SECTION("missing file") { CHECK_THROWS_AS(load_features(dir.file("nope.bin")), FormatError); }
}

TEST_CASE("features survive random round trips (32-bit payload)") {
    TempDir dir;
    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor m = oracle::random_tensor({1 + rng.below(6), 1 + rng.below(6)}, rng, -100.0, 100.0);
        for (double& v : m.data) v = static_cast<double>(static_cast<float>(v));  // storable values
        save_features(dir.file("r.bin"), m);
        Tensor back = load_features(dir.file("r.bin"));
        REQUIRE(back.shape == m.shape);
        for (std::size_t i = 0; i < m.numel(); ++i) CHECK(back.at(i) == m.at(i));
    }
}

TEST_CASE("label file round trip and validation") {
    TempDir dir;
    save_labels(dir.file("l.tsv"), {3, 1, 2}, {1, -1, 0});
    auto [noisy, ver] = load_labels(dir.file("l.tsv"), 3, 3);
    CHECK(noisy == std::vector<int>{3, 1, 2});
    CHECK(ver == std::vector<int>{1, -1, 0});

    SECTION("record describes the named sample") {
        detail::write_file(dir.file("one.tsv"), "1\t3\t1\n0\t2\t-1\n");
        auto [n2, v2] = load_labels(dir.file("one.tsv"), 2, 3);
        CHECK(n2[1] == 3);
        CHECK(v2[1] == 1);
        CHECK(v2[0] == -1);
    }
    SECTION("bad verification label names the line") {
        detail::write_file(dir.file("bad.tsv"), "0\t1\t1\n1\t1\t2\n");
        CHECK_THROWS_WITH(load_labels(dir.file("bad.tsv"), 2, 3), Catch::Matchers::ContainsSubstring("line 2"));
    }
    SECTION("class id out of range") {
        detail::write_file(dir.file("range.tsv"), "0\t4\t1\n");
        CHECK_THROWS_AS(load_labels(dir.file("range.tsv"), 1, 3), ValidationError);
    }
    SECTION("missing records") {
        detail::write_file(dir.file("short.tsv"), "0\t1\t1\n");
        CHECK_THROWS_AS(load_labels(dir.file("short.tsv"), 2, 3), ValidationError);
    }
    SECTION("duplicate index") {
        detail::write_file(dir.file("dup.tsv"), "0\t1\t1\n0\t2\t0\n");
        CHECK_THROWS_AS(load_labels(dir.file("dup.tsv"), 2, 3), ValidationError);
    }
}

TEST_CASE("scan_class_count infers L from the largest class id") {
    TempDir dir;
    save_labels(dir.file("l.tsv"), {3, 1, 7, 2}, {1, -1, 0, -1});
    CHECK(scan_class_count(dir.file("l.tsv")) == 7);
}

TEST_CASE("checkpoint save -> load -> save is byte identical") {
    TempDir dir;
    Rng rng(5);
    Checkpoint ckpt;
    ckpt.kind = "refsets";
    ckpt.set_meta_int("classes", 2);
    ckpt.set_meta_double("x", 0.1);
    ckpt.add_tensor("class_0001", oracle::random_tensor({3, 4}, rng, -5.0, 5.0));
    ckpt.add_tensor("class_0002", oracle::random_tensor({2, 4}, rng, -5.0, 5.0));
    save_checkpoint(dir.file("a.ckpt"), ckpt);
    Checkpoint loaded = load_checkpoint(dir.file("a.ckpt"));
    save_checkpoint(dir.file("b.ckpt"), loaded);
    CHECK(slurp(dir.file("a.ckpt")) == slurp(dir.file("b.ckpt")));

    // values round-trip bit exactly
    const Tensor& t = loaded.get_tensor("class_0001");
    for (std::size_t i = 0; i < t.numel(); ++i) CHECK(t.at(i) == ckpt.get_tensor("class_0001").at(i));
}

TEST_CASE("checkpoint corruption and version mismatches are rejected") {
    TempDir dir;
    Checkpoint ckpt;
    ckpt.kind = "refsets";
    ckpt.add_tensor("class_0001", Tensor::matrix(2, 2, {1, 2, 3, 4}));
    save_checkpoint(dir.file("c.ckpt"), ckpt);
    std::string text = slurp(dir.file("c.ckpt"));

    SECTION("wrong version is an explicit incompatibility") {
        std::string bumped = text;
        bumped.replace(bumped.find("CLEANNET-CKPT 1"), 15, "CLEANNET-CKPT 2");
        detail::write_file(dir.file("v.ckpt"), bumped);
        CHECK_THROWS_WITH(load_checkpoint(dir.file("v.ckpt")), Catch::Matchers::ContainsSubstring("incompatible"));
    }
    SECTION("short tensor row") {
        std::string cut = text;
        cut.replace(cut.find("0x1p+1 0x1p+2"), 13, "0x1p+1");
        detail::write_file(dir.file("cut.ckpt"), cut);
        CHECK_THROWS_AS(load_checkpoint(dir.file("cut.ckpt")), FormatError);
    }
    SECTION("missing end marker") {
        detail::write_file(dir.file("noend.ckpt"), text.substr(0, text.size() - 4));
        CHECK_THROWS_AS(load_checkpoint(dir.file("noend.ckpt")), FormatError);
    }
}

TEST_CASE("model checkpoints preserve scores exactly") {
    TempDir dir;
    Rng rng(6);
    CleanNetModel model = CleanNetModel::init(6, ModelDims{}, 33);
    Hyperparams hp;
    hp.omega = 2.0;
    ReferenceSets refs;
    refs[1] = ReferenceSet{1, oracle::random_tensor({4, 6}, rng, 0.1, 1.0)};
    const FrozenScorer before = FrozenScorer::build(model, refs);

    save_checkpoint(dir.file("m.ckpt"), checkpoint_from_cleannet(model, hp, 0));
    auto [loaded, hp2] = cleannet_from_checkpoint(load_checkpoint(dir.file("m.ckpt")));
    CHECK(hp2.omega == 2.0);
    const FrozenScorer after = FrozenScorer::build(loaded, refs);

    for (int q = 0; q < 10; ++q) {
        const Tensor query = oracle::random_tensor({6}, rng, -2.0, 2.0);
        const double a = before.score(query, 1);
        const double b = after.score(query, 1);
        CHECK(a == b);  // identical to the last bit
    }
}

TEST_CASE("reference sets ride the checkpoint tensor table") {
    TempDir dir;
    Rng rng(7);
    ReferenceSets refs;
    refs[3] = ReferenceSet{3, oracle::random_tensor({2, 5}, rng, 0.1, 1.0)};
    refs[8] = ReferenceSet{8, oracle::random_tensor({4, 5}, rng, 0.1, 1.0)};
    save_checkpoint(dir.file("r.ckpt"), checkpoint_from_reference_sets(refs));
    ReferenceSets back = reference_sets_from_checkpoint(load_checkpoint(dir.file("r.ckpt")));
    REQUIRE(back.size() == 2);
    CHECK(back.at(3).class_id == 3);
    CHECK(back.at(8).vectors.rows() == 4);
    for (std::size_t i = 0; i < refs.at(3).vectors.numel(); ++i)
        CHECK(back.at(3).vectors.at(i) == refs.at(3).vectors.at(i));
}

TEST_CASE("split_dataset partitions exactly and deterministically") {
    NoisyDataset ds;
    ds.class_count = 2;
    const std::size_t n = 100;
    ds.features = Tensor::zeros({n, 2});
    for (std::size_t i = 0; i < n; ++i) {
        ds.features.at(i, 0) = static_cast<double>(i);
        ds.noisy_labels.push_back(static_cast<int>(i % 2) + 1);
        ds.verification.push_back(1);
    }

    SECTION("fractions (1,0,0) keep everything in train") {
        const SplitResult s = split_dataset(ds, 1.0, 0.0, 0.0, 9);
        CHECK(s.train.size() == n);
        CHECK(s.val.size() == 0);
        CHECK(s.test.size() == 0);
    }
    SECTION("80/10/10 on n=100") {
        const SplitResult s = split_dataset(ds, 0.8, 0.1, 0.1, 9);
        CHECK(s.train.size() == 80);
        CHECK(s.val.size() == 10);
        CHECK(s.test.size() == 10);
    }
    SECTION("same seed gives identical splits") {
        const SplitResult a = split_dataset(ds, 0.6, 0.2, 0.2, 123);
        const SplitResult b = split_dataset(ds, 0.6, 0.2, 0.2, 123);
        CHECK(a.train_idx == b.train_idx);
        CHECK(a.val_idx == b.val_idx);
        CHECK(a.test_idx == b.test_idx);
    }
    SECTION("union of splits covers every index exactly once") {
        const SplitResult s = split_dataset(ds, 0.5, 0.3, 0.2, 77);
        std::vector<bool> seen(n, false);
        for (const auto* idx : {&s.train_idx, &s.val_idx, &s.test_idx})
            for (std::size_t i : *idx) {
                CHECK_FALSE(seen[i]);
                seen[i] = true;
            }
        for (bool b : seen) CHECK(b);
    }
    SECTION("fraction validation") {
        CHECK_THROWS_AS(split_dataset(ds, 0.5, 0.2, 0.2, 1), ValidationError);
        CHECK_THROWS_AS(split_dataset(ds, -0.1, 0.6, 0.5, 1), ValidationError);
    }
}

TEST_CASE("hyperparameter validation") {
    Hyperparams hp;
    hp.validate();
    hp.rho = 1.0;
    CHECK_THROWS_AS(hp.validate(), ValidationError);
    hp.rho = 0.1;
    hp.omega = 0.0;
    CHECK_THROWS_AS(hp.validate(), ValidationError);
    hp.omega = -1.0;  // auto
    hp.unverified_fraction = 1.5;
    CHECK_THROWS_AS(hp.validate(), ValidationError);
}
