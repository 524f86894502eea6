// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/binary_io.h"
#include "gkd/datagen.h"
#include "gkd/dataset.h"
#include "gkd/distill.h"
#include "gkd/errors.h"
#include "gkd/eval.h"

#include "doctest.h"
#include "test_support.h"

#include <cmath>
#include <filesystem>

using namespace gkd;
namespace fs = std::filesystem;

namespace {

std::string manifest_line(int i, const std::string& split = "train", const std::string& label = "yes") {
    return R"({"id":"s)" + std::to_string(i) + R"(","question":"why?","context":"because","visual":{"text":"a cat"},"label":")" +
           label + R"(","group":"g","split":")" + split + "\"}\n";
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gkd_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("well-formed manifest parses with split counts") {
    std::string text = R"({"labels":["yes","no"]})" "\n";
    for (int i = 0; i < 10; ++i) text += manifest_line(i, i < 6 ? "train" : (i < 8 ? "val" : "test"), i % 2 ? "no" : "yes");
    const Dataset d = parse_manifest(text);
    CHECK(d.records.size() == 10);
    CHECK(d.split_counts() == std::array<std::size_t, 3>{6, 2, 2});
    CHECK(d.labels == std::vector<std::string>{"yes", "no"});
    CHECK(d.label_index("no") == 1);
    CHECK(parse_manifest(encode_manifest(d)).records == d.records);
}

TEST_CASE("manifest errors carry line numbers and names") {
    std::string text;
    for (int i = 0; i < 6; ++i) text += manifest_line(i);
    SUBCASE("missing label on line 7") {
        const std::string bad = text + R"({"id":"s6","question":"q","split":"train"})" "\n";
        try {
            parse_manifest(bad);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 7);
            CHECK(std::string(e.what()).find("line 7") != std::string::npos);
        }
    }
    SUBCASE("malformed JSON") {
        CHECK_THROWS_AS(parse_manifest(text + "{not json\n"), ParseError);
    }
    SUBCASE("duplicate id") {
        try {
            parse_manifest(text + manifest_line(3));
            FAIL("expected InputError");
        } catch (const InputError& e) {
            CHECK(std::string(e.what()).find("s3") != std::string::npos);
        }
    }
    SUBCASE("unknown split and label") {
        CHECK_THROWS_AS(parse_manifest(manifest_line(0, "dev")), VocabularyError);
        CHECK_THROWS_AS(parse_manifest(R"({"labels":["yes"]})" "\n" + manifest_line(0, "train", "maybe")), VocabularyError);
    }
    SUBCASE("visual needs exactly one form") {
        CHECK_THROWS_AS(parse_manifest(R"({"id":"a","question":"q","label":"x","split":"train","visual":{}})"), ParseError);
    }
}

TEST_CASE("unresolved visual embedding references are reported") {
    const fs::path dir = scratch_dir("refs");
    write_file(dir / "m.jsonl", R"({"id":"a","question":"q","visual":{"embedding":"img/7"},"label":"x","split":"train"})" "\n");
    EmbeddingStore store(2);
    CHECK_THROWS_AS(ingest_manifest(dir / "m.jsonl", &store), MissingError);
    store.add("img/7", {1, 0});
    CHECK(ingest_manifest(dir / "m.jsonl", &store).records.size() == 1);
    fs::remove_all(dir);
}

TEST_CASE("synthetic config validation") {
    SynthConfig c;
    c.train_fraction = 0.8;
    CHECK_THROWS_AS(generate_synthetic(c), ConfigError);
    c = SynthConfig{};
    c.classes = 1;
    CHECK_THROWS_AS(generate_synthetic(c), ConfigError);
    c = SynthConfig{};
    c.samples = 3;
    CHECK_THROWS_AS(generate_synthetic(c), ConfigError);
    c = SynthConfig{};
    c.mask_prob = 1.5;
    CHECK_THROWS_AS(generate_synthetic(c), ConfigError);
}

TEST_CASE("synthetic generation is a pure function of its config") {
    const fs::path a = scratch_dir("gen_a"), b = scratch_dir("gen_b");
    write_synthetic(generate_synthetic(test::small_synth(7)), a);
    write_synthetic(generate_synthetic(test::small_synth(7)), b);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        CHECK(read_file(entry.path()) == read_file(b / entry.path().filename()));
        ++files;
    }
    CHECK(files == 6);
    write_synthetic(generate_synthetic(test::small_synth(8)), b);
    CHECK(read_file(a / "content.gemb") != read_file(b / "content.gemb"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("generated files ingest cleanly") {
    const fs::path dir = scratch_dir("ingest");
    const SynthDataset data = generate_synthetic(test::small_synth(1));
    write_synthetic(data, dir);
    const EmbeddingStore content = read_embedding_store(dir / "content.gemb");
    const Dataset d = ingest_manifest(dir / "manifest.jsonl", &content);
    CHECK(d.records == data.dataset.records);
    const TripletStore store(read_triplets_tsv(dir / "triplets.tsv"), read_embedding_store(dir / "triplets.gemb"));
    CHECK(store.size() == 4 * 8);
    fs::remove_all(dir);
}

TEST_CASE("default dataset class counts per split are balanced") {
    const SynthDataset data = generate_synthetic(SynthConfig{});
    const double fractions[3] = {0.7, 0.1, 0.2};
    std::array<std::array<std::size_t, 4>, 3> counts{};
    for (const auto& r : data.dataset.records) ++counts[static_cast<std::size_t>(r.split)][data.dataset.label_index(r.label)];
    for (std::size_t s = 0; s < 3; ++s) {
        const double expected = 2000 * fractions[s] / 4;
        for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(counts[s][c] - expected) <= 0.1 * expected);
    }
}

TEST_CASE("masking removes the signal from question and context only") {
    SynthConfig c = test::small_synth(3);
    c.mask_prob = 1.0;
    const SynthDataset data = generate_synthetic(c);
    double q_align = 0.0, v_align = 0.0;
    for (std::size_t i = 0; i < data.dataset.records.size(); ++i) {
        const auto& r = data.dataset.records[i];
        const auto proto = data.truth.prototypes.row(data.dataset.label_index(r.label));
        q_align += cosine_sim(data.content.at(r.id + "/question"), proto);
        v_align += cosine_sim(data.content.at(*r.visual.embedding_id), proto);
    }
    const double n = static_cast<double>(data.dataset.records.size());
    CHECK(std::abs(q_align / n) < 0.05);
    CHECK(v_align / n > 0.2);
}

TEST_CASE("unmasked default data is learnable by the raw-feature student") {
    SynthConfig c;
    c.mask_prob = 0.0;
    const GraphSet set = test::synthetic_graphs(c);
    DistillConfig d;
    const StudentRun run =
        train_supervised(filter_split(set.graphs, Split::train), {}, set.labels.size(), d);
    const EvalReport report = evaluate_model(run.model, set.graphs, Split::test, set.labels);
    CHECK(report.micro_f1 >= 0.9);
}
