#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "scribe/checkpoint.hpp"
#include "scribe/config.hpp"
#include "scribe/data_io.hpp"
#include "scribe/model.hpp"
#include "support.hpp"

using namespace scribe;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / "scribe_unit";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path &p, const std::string &s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

} // namespace

TEST_CASE("text corpora") {
    SUBCASE("first appearance breaks frequency ties") {
        const TextCorpus c = build_text_corpus("abcabc", Granularity::Char);
        CHECK(c.vocab.size() == 3);
        CHECK(c.symbols == std::vector<int>{0, 1, 2, 0, 1, 2});
        CHECK(c.vocab.unknown == -1);
        const TextCorpus d = build_text_corpus("xyyzzz", Granularity::Char);
        CHECK(d.vocab.symbols == std::vector<std::string>{"z", "y", "x"});
    }
    SUBCASE("word limit maps the overflow to unknown") {
        const TextCorpus c = build_text_corpus("a a b c", Granularity::Word, 2);
        CHECK(c.vocab.symbols[0] == "a");
        CHECK(c.vocab.symbols[1] == "b");
        CHECK(c.symbols[3] == c.vocab.unknown);
        CHECK(c.vocab.symbols[static_cast<std::size_t>(c.vocab.unknown)] == "<unk>");
        CHECK(encode_text("a zebra", c.vocab)[1] == c.vocab.unknown);
        const TextCorpus lines = build_text_corpus("one two\nthree", Granularity::Word);
        CHECK(lines.symbols.size() == 4);
        CHECK(lines.vocab.decode(lines.symbols) == "one two\nthree");
    }
    SUBCASE("bytes and characters") {
        std::string all;
        for (int b = 0; b < 256; ++b) all += static_cast<char>(b);
        const TextCorpus bytes = build_text_corpus(all + all, Granularity::Byte);
        CHECK(bytes.vocab.size() == 256);
        const TextCorpus utf = build_text_corpus("na\xC3\xAFve \xE2\x97\x8A", Granularity::Char);
        CHECK(utf.symbols.size() == 7);
        CHECK(utf.vocab.decode(utf.symbols) == "na\xC3\xAFve \xE2\x97\x8A");
        CHECK(build_text_corpus("na\xC3\xAFve", Granularity::Byte).symbols.size() == 6);
        CHECK_THROWS_AS(build_text_corpus("bad \xC3", Granularity::Char), std::runtime_error);
        CHECK_THROWS(encode_text("q", build_text_corpus("ab", Granularity::Char).vocab));
    }
    SUBCASE("files") {
        const fs::path p = scratch("corpus.txt");
        write_file(p, "hello hello world");
        const TextCorpus a = load_text_corpus(p, Granularity::Char);
        const TextCorpus b = load_text_corpus(p, Granularity::Char);
        CHECK(a.vocab.symbols == b.vocab.symbols);
        CHECK(a.symbols == b.symbols);
        write_file(p, "");
        CHECK_THROWS(load_text_corpus(p, Granularity::Char));
        CHECK_THROWS(load_text_corpus(scratch("missing.txt"), Granularity::Char));
    }
    SUBCASE("chunks and splits") {
        const std::vector<int> s{0, 1, 2, 3, 4, 5, 6};
        const auto chunks = chunk_symbols(s, 3);
        REQUIRE(chunks.size() == 3);
        CHECK(chunks[2] == std::vector<int>{6});
        const TextSplit sp = split_tail(s, 0.3);
        CHECK(sp.train.size() + sp.valid.size() == 7);
        CHECK(sp.valid.back() == 6);
        CHECK(sp.train.front() == 0);
    }
}

TEST_CASE("stroke files") {
    SUBCASE("absolute points are differenced") {
        const StrokeSeq s =
            parse_stroke_line(R"({"text":"ab","points":[[0,0,0],[1,0,0],[1,2,1]]})", {});
        REQUIRE(s.points.size() == 2);
        CHECK(s.points[0] == StrokePoint{1, 0, 0});
        CHECK(s.points[1] == StrokePoint{0, 2, 1});
        CHECK(s.text == "ab");
    }
    SUBCASE("offsets are read as is") {
        const StrokeSeq s = parse_stroke_line(R"({"text":"","strokes":[[0.5,-1,0],[2,3,1]]})", {});
        CHECK(s.points[1] == StrokePoint{2, 3, 1});
    }
    SUBCASE("malformed lines name the line") {
        for (const char *bad : {R"({"strokes":[[0,0,2]]})", R"({"strokes":[[0,0]]})",
                                R"({"strokes":"x"})", "not json", R"({"text":"a"})"}) {
            CAPTURE(bad);
            try {
                parse_stroke_line(bad, {}, 17);
                FAIL("accepted");
            } catch (const std::runtime_error &e) {
                CHECK(std::string(e.what()).find("17") != std::string::npos);
            }
        }
    }
    SUBCASE("round trip through a file") {
        const fs::path p = scratch("strokes.jsonl");
        const std::vector<StrokeSeq> seqs{{{{0.1, 0.2, 0}, {1e-17, -3.5, 1}}, "hi"},
                                          {{{4, 5, 1}}, "x\"y"}};
        save_strokes(p, seqs);
        const auto back = load_strokes(p);
        REQUIRE(back.size() == 2);
        CHECK(back[0].points == seqs[0].points);
        CHECK(back[1].text == "x\"y");
        write_file(p, stroke_to_json_line(seqs[0]) + "\n\n{oops\n");
        try {
            load_strokes(p);
            FAIL("accepted");
        } catch (const std::runtime_error &e) {
            CHECK(std::string(e.what()).find("3") != std::string::npos);
        }
    }
}

TEST_CASE("long-step repair") {
    // absolute x: 0, 1, 101, 2, 3 -> the spike at 101 is a recording error
    const std::vector<StrokePoint> in{{1, 0, 0}, {100, 0, 0}, {-99, 0, 0}, {1, 0, 1}};
    const auto out = repair_long_steps(in, 10.0);
    REQUIRE(out.size() == 4);
    // it moves to the midpoint of its neighbours 1 and 2
    double x = 0;
    std::vector<double> xs;
    for (const StrokePoint &p : out) xs.push_back(x += p.dx);
    CHECK(xs[0] == doctest::Approx(1));
    CHECK(xs[1] == doctest::Approx(1.5));
    CHECK(xs[2] == doctest::Approx(2));
    CHECK(xs[3] == doctest::Approx(3));
    CHECK(out[3].eos == 1);

    // after a pen lift long jumps are legitimate
    const std::vector<StrokePoint> lift{{1, 0, 1}, {100, 0, 0}, {1, 0, 1}};
    CHECK(repair_long_steps(lift, 10.0) == lift);

    // a final over-long step is dropped and its pen lift kept
    const std::vector<StrokePoint> tail{{1, 0, 0}, {1, 0, 0}, {50, 0, 1}};
    const auto t = repair_long_steps(tail, 10.0);
    REQUIRE(t.size() == 2);
    CHECK(t[1].eos == 1);

    const auto loaded = parse_stroke_line(
        R"({"text":"","points":[[0,0,0],[1,0,0],[1,90,0],[2,0,0],[3,0,1]]})", {10.0});
    REQUIRE(loaded.points.size() == 4);
    double ly = 0;
    for (const StrokePoint &p : loaded.points) {
        CHECK(std::hypot(p.dx, p.dy) <= 10);
        ly += p.dy;
    }
    CHECK(ly == doctest::Approx(0));
}

TEST_CASE("normalisation") {
    Rng rng(3);
    std::vector<StrokeSeq> train(5), valid(2);
    for (auto *set : {&train, &valid})
        for (StrokeSeq &s : *set)
            for (int i = 0; i < 40; ++i)
                s.points.push_back({rng.normal(2, 3), rng.normal(-1, 0.5), i % 7 == 0});
    const NormalizedData nd = normalize_offsets(train, valid);
    CHECK(nd.stats == compute_norm_stats(train));
    const NormStats again = compute_norm_stats(nd.train);
    CHECK(std::abs(again.mean_x) < 1e-12);
    CHECK(std::abs(again.std_y - 1.0) < 1e-12);
    for (std::size_t i = 0; i < 40; ++i) CHECK(nd.valid[0].points[i].eos == valid[0].points[i].eos);

    // leakage: the validation split never touches the statistics
    std::vector<StrokeSeq> mutated = valid;
    mutated[0].points[0].dx = 1e6;
    CHECK(normalize_offsets(train, mutated).stats == nd.stats);

    const auto back = remove_norm(nd.train, nd.stats);
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(std::abs(back[1].points[i].dx - train[1].points[i].dx) < 1e-12);
        CHECK(std::abs(back[1].points[i].dy - train[1].points[i].dy) < 1e-12);
    }

    const std::vector<StrokeSeq> flat{{{{1, 1, 0}, {1, 1, 0}}, ""}};
    const NormStats fs = compute_norm_stats(flat);
    CHECK(fs.std_x == kMinStd);
    CHECK(std::isfinite(apply_norm(flat, fs)[0].points[0].dx));
}

TEST_CASE("manifests") {
    const fs::path p = scratch("train.manifest");
    write_file(p, "2\n0\n\n");
    const auto idx = load_manifest(p);
    CHECK(idx == std::vector<std::size_t>{2, 0});
    const std::vector<StrokeSeq> seqs{{{}, "a"}, {{}, "b"}, {{}, "c"}};
    const auto sel = select_lines(seqs, idx);
    CHECK(sel[0].text == "c");
    CHECK(sel[1].text == "a");
    CHECK_THROWS(select_lines(seqs, std::vector<std::size_t>{3}));
    write_file(p, "1\nx\n");
    CHECK_THROWS(load_manifest(p));
}

TEST_CASE("transcripts") {
    const Alphabet ab = Alphabet::from_chars("ab");
    CHECK(ab.size() == 3);
    const CharSeq c = encode_transcript("ab", ab);
    CHECK(c.indices == std::vector<int>{0, 1});
    CHECK(encode_transcript("a7b", ab).indices == std::vector<int>{0, 2, 1});
    const Mat oh = c.one_hot();
    CHECK(oh(0, 0) == 1.0);
    CHECK(oh(1, 1) == 1.0);
    CHECK(oh(1, 0) == 0.0);

    const Alphabet std57 = Alphabet::standard();
    CHECK(std57.size() == 57);
    const std::string text = "Hello, World. It's";
    CHECK(decode_transcript(encode_transcript(text, std57), std57) == text);
    CHECK(decode_transcript(encode_transcript("x9", std57), std57) ==
          "x" + std::string(kNonLetterLabel));
}

TEST_CASE("toy glyph corpus") {
    SUBCASE("noise-free sequences are concatenated motifs") {
        ToyGlyphOptions o;
        o.noise_std = 0.0;
        o.n_sequences = 50;
        const ToyGlyphCorpus toy = make_toy_glyph_corpus(o);
        CHECK(toy.motifs.size() == 5);
        CHECK(toy.alphabet.size() == 6);
        for (const auto &m : toy.motifs) {
            CHECK(m.size() == 10);
            CHECK(m.back().eos == 1);
            for (std::size_t i = 0; i + 1 < m.size(); ++i) CHECK(m[i].eos == 0);
        }
        for (const StrokeSeq &s : toy.sequences) {
            CHECK(s.points.size() == s.text.size() * 10 + 1);
            std::vector<StrokePoint> cat{{0.0, 0.0, 0}};
            for (char ch : s.text) {
                const auto &m = toy.motifs[static_cast<std::size_t>(ch - 'a')];
                cat.insert(cat.end(), m.begin(), m.end());
            }
            CHECK(s.points == cat);
        }
    }
    SUBCASE("deterministic in the seed") {
        ToyGlyphOptions o;
        o.n_sequences = 20;
        const auto a = make_toy_glyph_corpus(o), b = make_toy_glyph_corpus(o);
        CHECK(a.sequences[7].points == b.sequences[7].points);
        o.seed = 2;
        CHECK(make_toy_glyph_corpus(o).motifs[0] != a.motifs[0]);
    }
    SUBCASE("nearest-motif decoding recovers noisy transcripts") {
        ToyGlyphOptions o;
        o.noise_std = 0.05;
        const ToyGlyphCorpus toy = make_toy_glyph_corpus(o);
        double acc = 0;
        for (const StrokeSeq &s : toy.sequences)
            acc += testing::symbol_accuracy(testing::decode_glyphs(s.points, toy), s.text);
        CHECK(acc / static_cast<double>(toy.sequences.size()) >= 0.99);
    }
    SUBCASE("needs two symbols") {
        ToyGlyphOptions o;
        o.n_symbols = 1;
        CHECK_THROWS(make_toy_glyph_corpus(o));
    }
}

TEST_CASE("checkpoints") {
    SUBCASE("text model and optimizer round trip bit for bit") {
        std::string bytes;
        for (int b = 1; b < 256; b += 3) bytes += static_cast<char>(b);
        const TextCorpus c = build_text_corpus(bytes, Granularity::Byte);
        Model m = make_text_model(c.vocab, {7, 5}, 3);
        m.params = testing::random_params(m.arch(), 8, 1.0);
        m.params.flat()[0] = 0x1.23456789abcdep-1000; // subnormal-range detail
        OptimizerConfig oc;
        oc.rmsprop.learning_rate = 3e-3;
        Optimizer opt(oc, m.params.size());
        opt.step(m.params.flat(), testing::random_params(m.arch(), 9, 1.0).flat());
        const fs::path p = scratch("text.ck");
        save_checkpoint(p, m, &opt);
        const Checkpoint back = load_checkpoint(p);
        CHECK(back.model.arch() == m.arch());
        CHECK(std::memcmp(back.model.params.flat().data(), m.params.flat().data(),
                          m.params.size() * sizeof(double)) == 0);
        CHECK(back.model.vocab->symbols == m.vocab->symbols);
        REQUIRE(back.optimizer);
        CHECK(back.optimizer->rms.n == opt.rms.n);
        CHECK(back.optimizer->rms.delta == opt.rms.delta);
        CHECK(back.optimizer->steps == 1);
        CHECK(back.optimizer->config.rmsprop.learning_rate == 3e-3);
    }
    SUBCASE("synthesis model") {
        const NormStats ns{0.1, -0.2, 1.5, 0.7};
        const Model m = make_synthesis_model({6, 4}, 3, 2, Alphabet::standard(), ns, 5);
        const fs::path p = scratch("synth.ck");
        save_checkpoint(p, m);
        const Checkpoint back = load_checkpoint(p);
        CHECK_FALSE(back.optimizer);
        CHECK(back.model.head == HeadKind::Mixture);
        CHECK(back.model.mixture_components == 3);
        CHECK(*back.model.norm == ns);
        CHECK(*back.model.alphabet == Alphabet::standard());
        CHECK(back.model.params.flat()[17] == m.params.flat()[17]);
    }
    SUBCASE("damaged files are rejected") {
        const Model m = make_handwriting_model({4}, 2, NormStats{}, 1);
        const fs::path p = scratch("hw.ck");
        save_checkpoint(p, m);
        std::ifstream in(p, std::ios::binary);
        std::string raw((std::istreambuf_iterator<char>(in)), {});
        write_file(p, raw.substr(0, raw.size() - 9));
        CHECK_THROWS_AS(load_checkpoint(p), std::runtime_error);
        std::string bad = raw;
        bad[0] = 'X';
        write_file(p, bad);
        CHECK_THROWS_AS(load_checkpoint(p), std::runtime_error);
        bad = raw;
        bad[8] = 9; // version
        write_file(p, bad);
        CHECK_THROWS_AS(load_checkpoint(p), std::runtime_error);
        CHECK_THROWS_AS(load_checkpoint(scratch("nope.ck")), std::runtime_error);
    }
}

TEST_CASE("config files") {
    const ConfigFile c = ConfigFile::parse(
        "# comment\ntask = text\nlayers = 400, 400\nlr=1e-3  # trailing\nflag = yes\n"
        "clip = 100\nwide = -1,2\nnone = none\n\n");
    CHECK(c.get("task") == "text");
    CHECK(c.get_int_list("layers", {}) == std::vector<int>{400, 400});
    CHECK(c.get_double("lr", 0) == 1e-3);
    CHECK(c.get_bool("flag", false));
    CHECK(c.get_int("missing", 7) == 7);
    CHECK(c.get_clip("clip", {}).lo == -100);
    CHECK(c.get_clip("wide", {}).hi == 2);
    CHECK_FALSE(c.get_clip("none", {-1, 1}).active());
    CHECK_THROWS(c.get("absent"));
    CHECK_THROWS(c.get_int("task", 0));
    CHECK_THROWS(c.check_known({"task"}));
    CHECK_THROWS(ConfigFile::parse("a = 1\na = 2\n"));
    CHECK_THROWS(ConfigFile::parse("just words\n"));
    CHECK(ConfigFile::parse("x = inf").get_double("x", 0) == INFINITY);
}
