// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/embedding.h"
#include "gkd/errors.h"
#include "gkd/rng.h"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

using namespace gkd;

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

EmbeddingStore three_entry_store() {
    EmbeddingStore s(3);
    s.add("a", {0.25, -1.5, 3.0});
    s.add("b", {1.0, 0.0, 0.0});
    s.add("c", {-0.125, 0.5, 1e-3});
    return s;
}

TripletStore store_from_rows(const std::vector<Vector>& rows) {
    std::vector<Triplet> triplets;
    EmbeddingStore e(rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        triplets.push_back({"h" + std::to_string(i), "rel", "t"});
        e.add(triplet_id(i), rows[i]);
    }
    return TripletStore(std::move(triplets), std::move(e));
}

}  // namespace

TEST_CASE("toy_embed is deterministic and unit norm") {
    const Vector a = toy_embed("cat sat", 64, 7), b = toy_embed("cat sat", 64, 7);
    CHECK(a == b);
    CHECK(std::abs(norm(a) - 1.0) <= 1e-12);
    for (const char* text : {"x", "a much longer sentence with many words", "Mixed CASE, punctuation!"}) {
        CHECK(std::abs(norm(toy_embed(text, 16, 3)) - 1.0) <= 1e-12);
    }
}

TEST_CASE("toy_embed depends on the seed") {
    const double c = cosine_sim(toy_embed("cat sat", 64, 7), toy_embed("cat sat", 64, 8));
    CHECK(c < 0.99);
    CHECK(c == doctest::Approx(0.115361817).epsilon(1e-8));
}

TEST_CASE("toy_embed maps empty text to e1 and rejects tiny dims") {
    const Vector e = toy_embed("", 5, 1);
    CHECK(e == Vector{1, 0, 0, 0, 0});
    CHECK(toy_embed("   ", 5, 1) == e);
    CHECK_THROWS_AS(toy_embed("x", 1, 1), ConfigError);
}

TEST_CASE("tokenize lower-cases and splits on non-alphanumerics") {
    CHECK(tokenize("Cat, SAT on-the mat!") == std::vector<std::string>{"cat", "sat", "on", "the", "mat"});
    CHECK(tokenize("").empty());
}

TEST_CASE("cosine similarity worked cases") {
    CHECK(cosine_sim(Vector{1, 0}, Vector{1, 0}) == 1.0);
    CHECK(cosine_sim(Vector{1, 0}, Vector{0, 1}) == 0.0);
    CHECK(cosine_sim(Vector{1, 1}, Vector{1, 0}) == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK(cosine_sim(Vector{2, 0}, Vector{-3, 0}) == -1.0);
    CHECK_THROWS_AS(cosine_sim(Vector{1, 0}, Vector{1, 0, 0}), ShapeError);
    CHECK_THROWS_AS(cosine_sim(Vector{0, 0}, Vector{1, 0}), InvariantError);
}

TEST_CASE("cosine similarity stays within [-1, 1]") {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        Vector u(7);
        for (double& x : u) x = rng.normal();
        Vector v = u;
        for (double& x : v) x *= 1.0 + 1e-9 * rng.normal();
        const double c = cosine_sim(u, v);
        CHECK((c <= 1.0 && c >= -1.0));
    }
}

TEST_CASE("self retrieval and tie rule") {
    const TripletStore store = store_from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 0}});
    const auto self = top_k_triplets(Vector{0, 0, 1}, store, 1);
    REQUIRE(self.size() == 1);
    CHECK(self[0].index == 2);
    CHECK(self[0].similarity == 1.0);

    const auto tie = top_k_triplets(Vector{0, 2, 0}, store, 2);
    REQUIRE(tie.size() == 2);
    CHECK(tie[0].index == 1);
    CHECK(tie[1].index == 3);

    CHECK(top_k_triplets(Vector{1, 1, 1}, store, 10).size() == 4);
    CHECK_THROWS_AS(top_k_triplets(Vector{1, 0, 0}, store, 0), ConfigError);
}

TEST_CASE("top_k matches a full-sort oracle on a 1000-triplet store") {
    Rng rng(8);
    std::vector<Vector> rows(1000, Vector(16));
    for (auto& r : rows)
        for (double& x : r) x = rng.normal();
    const TripletStore store = store_from_rows(rows);
    for (int q = 0; q < 20; ++q) {
        Vector query(16);
        for (double& x : query) x = rng.normal();
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double dot = 0.0, nq = 0.0, nr = 0.0;
            for (std::size_t d = 0; d < 16; ++d) {
                dot += query[d] * rows[i][d];
                nq += query[d] * query[d];
                nr += rows[i][d] * rows[i][d];
            }
            all.push_back({dot / (std::sqrt(nq) * std::sqrt(nr)), i});
        }
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        const auto hits = top_k_triplets(query, store, 3);
        REQUIRE(hits.size() == 3);
        for (std::size_t j = 0; j < 3; ++j) CHECK(hits[j].index == all[j].second);
    }
}

TEST_CASE("embedding store binary round trip") {
    const EmbeddingStore s = three_entry_store();
    const std::string bytes = encode_embedding_store(s);
    CHECK(bytes.substr(0, 4) == "GEMB");
    const EmbeddingStore back = decode_embedding_store(bytes);
    CHECK(encode_embedding_store(back) == bytes);
    REQUIRE(back.size() == 3);
    CHECK(back.id(2) == "c");
    CHECK(back.at("a")[1] == -1.5);

    const auto path = std::filesystem::temp_directory_path() / "gkd_test_store.gemb";
    write_embedding_store(s, path);
    CHECK(read_embedding_store(path) == back);
    std::filesystem::remove(path);
}

TEST_CASE("embedding store corruption is a format error") {
    const std::string bytes = encode_embedding_store(three_entry_store());
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_embedding_store(bad_magic), FormatError);

    const std::string truncated = bytes.substr(0, bytes.size() - 6);
    try {
        decode_embedding_store(truncated);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() > 20);
        CHECK(e.offset() <= truncated.size());
    }
    CHECK_THROWS_AS(decode_embedding_store(bytes + "x"), FormatError);
    std::string bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_AS(decode_embedding_store(bad_version), FormatError);
}

TEST_CASE("embedding store rejects duplicates, wrong widths and missing ids") {
    EmbeddingStore s(2);
    s.add("x", {1, 2});
    CHECK_THROWS_AS(s.add("x", {3, 4}), InputError);
    CHECK_THROWS_AS(s.add("y", {1, 2, 3}), InputError);
    CHECK_THROWS_AS(s.add("z", {1, std::nan("")}), InputError);
    CHECK_THROWS_AS(s.at("missing"), MissingError);
    CHECK(s.contains("x"));
}

TEST_CASE("triplet TSV parsing") {
    const auto triplets = parse_triplets_tsv("cat\tIsA\tanimal\nsun\tHasProperty\thot\r\n");
    REQUIRE(triplets.size() == 2);
    CHECK(triplets[1] == Triplet{"sun", "HasProperty", "hot"});
    CHECK(triplets[0].surface() == "cat IsA animal");
    try {
        parse_triplets_tsv("a\tb\tc\nonly two\tfields\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_triplets_tsv("a\tb\tc\n\nd\te\tf\n"), ParseError);
}

TEST_CASE("triplet store validates its embedding ids") {
    EmbeddingStore e(2);
    e.add("t0", {1, 0});
    CHECK_THROWS(TripletStore({{"a", "b", "c"}, {"d", "e", "f"}}, e));
    EmbeddingStore wrong(2);
    wrong.add("x", {1, 0});
    CHECK_THROWS(TripletStore({{"a", "b", "c"}}, wrong));
    CHECK_NOTHROW(TripletStore({{"a", "b", "c"}}, e));
}
