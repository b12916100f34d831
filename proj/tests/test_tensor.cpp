#include <catch2/catch_amalgamated.hpp>

#include "cleannet/tensor.hpp"

#include "oracle.hpp"

using namespace cleannet;

TEST_CASE("tensor shape and data stay consistent") {
    Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(t.at(1, 2) == 6.0);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
}

TEST_CASE("scalars are rank 0 with one element") {
    Tensor s = Tensor::scalar(2.5);
    CHECK(s.rank() == 0);
    CHECK(s.numel() == 1);
    CHECK(s.item() == 2.5);
    CHECK_THROWS_AS(Tensor::vector({1, 2}).item(), ContractError);
}

TEST_CASE("zero-row matrices are allowed and keep their width") {
    Tensor t = Tensor::zeros({0, 5});
    CHECK(t.numel() == 0);
    CHECK(t.cols() == 5);
}

TEST_CASE("all_finite flags NaN and Inf") {
    Tensor t = Tensor::vector({1.0, 2.0});
    CHECK(t.all_finite());
    t.at(1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(t.all_finite());
    t.at(1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("cosine similarity basics") {
    CHECK(cosine_similarity(std::vector<double>{3, 4}, std::vector<double>{3, 4}) == 1.0);
    CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(cosine_similarity(std::vector<double>{1, 1}, std::vector<double>{-1, -1}) == -1.0);
    CHECK_THROWS_AS(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}), NumericError);
}

TEST_CASE("cosine similarity is clamped to [-1,1] on random inputs") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const auto a = oracle::random_tensor({5}, rng, -10.0, 10.0);
        const double c = cosine_similarity(a.data, a.data);
        CHECK(c <= 1.0);
        CHECK(c >= 1.0 - 1e-12);
    }
}

TEST_CASE("l2_normalize_rows leaves zero rows alone") {
    Tensor m = Tensor::matrix(2, 2, {3, 4, 0, 0});
    l2_normalize_rows(m);
    CHECK(m.at(0, 0) == Catch::Approx(0.6));
    CHECK(m.at(0, 1) == Catch::Approx(0.8));
    CHECK(m.at(1, 0) == 0.0);
    CHECK(m.at(1, 1) == 0.0);
}
