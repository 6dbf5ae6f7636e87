#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "profile_forge/corpus.hpp"
#include "profile_forge/extract/pipeline.hpp"
#include "profile_forge/json_io.hpp"
#include "profile_forge/quantize.hpp"
#include "profile_forge/tokens.hpp"

using namespace pforge;

namespace {

ConstructionSequence fixture()
{
    return sequence_from_json(read_json_file(std::string(PF_FIXTURE_DIR) + "/ibeam_sequence.json"));
}

std::vector<ConstructionSequence> corpus_sequences(std::size_t n, std::uint64_t seed)
{
    std::vector<ConstructionSequence> out;
    CorpusGenerator gen(seed);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            out.push_back(extract(gen.next(), seed + i).sequence);
        } catch (const std::exception&) {
        }
    }
    return out;
}

}  // namespace

TEST(Quantize, LengthsRecoveredExactly)
{
    for (double v : {-1.0, 0.0, 1.0}) EXPECT_EQ(dequantize_length(quantize_length(v)), v);
    EXPECT_EQ(quantize_length(-1.0), 0);
    EXPECT_EQ(quantize_length(1.0), kLengthBins - 1);
}

TEST(Quantize, AnglesRecoveredExactly)
{
    for (double a : {0.0, kPi / 3, kPi / 2, kPi, 3 * kPi / 2}) EXPECT_EQ(dequantize_angle(quantize_angle(a)), a);
    // 2pi wraps onto 0
    EXPECT_EQ(quantize_angle(kTwoPi), quantize_angle(0.0));
}

TEST(Quantize, OriginRecoveredExactly)
{
    const Point2 p = dequantize_point(quantize_point({0.0, 0.0}));
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.y, 0.0);
}

TEST(Quantize, ErrorIsAtMostHalfABin)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double v = u(rng);
        EXPECT_LE(std::abs(snap_length(v) - v), 0.5 / 63 + 1e-15);
        const double a = (u(rng) + 1.0) * kPi;
        EXPECT_LE(angle_between(snap_angle(a), a), kPi / 120 + 1e-12);
        const Point2 p{u(rng) / 2, u(rng) / 2};
        const Point2 q = snap_point(p);
        EXPECT_LE(std::abs(q.x - p.x), 0.5 / 126 + 1e-15);
        EXPECT_LE(std::abs(q.y - p.y), 0.5 / 126 + 1e-15);
    }
}

TEST(Quantize, SnapIsIdempotent)
{
    for (int k = 0; k < kLengthBins; ++k) EXPECT_EQ(quantize_length(dequantize_length(k)), k);
    for (int k = 0; k < 120; ++k) EXPECT_EQ(quantize_angle(dequantize_angle(k)), k);
    for (int k = 0; k < kPointBins; ++k) EXPECT_EQ(quantize_axis(dequantize_axis(k)), k);
}

TEST(Quantize, OutOfDomainThrows)
{
    EXPECT_THROW(quantize_length(1.2), OutOfRange);
    EXPECT_THROW(quantize_length(std::nan("")), OutOfRange);
    EXPECT_THROW(quantize_point({0.6, 0.0}), OutOfRange);
    EXPECT_THROW(quantize_angle(INFINITY), OutOfRange);
    EXPECT_THROW(dequantize_length(kLengthBins), OutOfRange);
}

TEST(Vocabulary, ManifestMatchesShippedFile)
{
    std::ifstream in(std::string(PF_DATA_DIR) + "/vocab_v1.txt");
    ASSERT_TRUE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), vocabulary_manifest());
}

TEST(Vocabulary, EveryIdDecodesToItsFamily)
{
    for (int id = 0; id < vocabulary_size(); ++id) {
        const auto d = decode_token(id);
        ASSERT_TRUE(d.has_value()) << id;
        EXPECT_EQ(token_id(d->family, d->value), id);
    }
    EXPECT_FALSE(decode_token(vocabulary_size()).has_value());
    EXPECT_FALSE(decode_token(-1).has_value());
}

TEST(Tokens, FixtureRoundTrip)
{
    const auto seq = fixture();
    const auto toks = tokenize(seq);
    EXPECT_EQ(detokenize(toks), quantized_copy(seq));
}

TEST(Tokens, CorpusRoundTrip)
{
    const auto seqs = corpus_sequences(60, 17);
    ASSERT_GT(seqs.size(), 50u);
    for (const auto& s : seqs) {
        const auto toks = tokenize(s);
        EXPECT_EQ(detokenize(toks), quantized_copy(s));
    }
}

TEST(Tokens, FileFormatRoundTrip)
{
    const auto toks = tokenize(fixture());
    std::stringstream ss;
    write_tokens(ss, toks);
    EXPECT_EQ(read_tokens(ss), toks);
}

TEST(Tokens, TruncatedStreamReportsEndPosition)
{
    auto toks = tokenize(fixture());
    toks.resize(toks.size() / 2);
    try {
        (void)detokenize(toks);
        FAIL() << "truncated stream accepted";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.position, toks.size());
    }
}

TEST(Tokens, UnknownTokenIdIsRejectedAtItsPosition)
{
    auto toks = tokenize(fixture());
    toks[5] = vocabulary_size() + 3;
    try {
        (void)detokenize(toks);
        FAIL() << "bad id accepted";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.position, 5u);
    }
}

TEST(Tokens, RandomMutationsNeverCrash)
{
    const auto seqs = corpus_sequences(20, 5);
    ASSERT_FALSE(seqs.empty());
    std::mt19937_64 rng(99);
    int accepted = 0, rejected = 0;
    for (int i = 0; i < 2000; ++i) {
        auto toks = tokenize(seqs[static_cast<std::size_t>(i) % seqs.size()]);
        const int edits = 1 + static_cast<int>(rng() % 3);
        for (int e = 0; e < edits; ++e) {
            const std::size_t pos = rng() % toks.size();
            const int tok = static_cast<int>(rng() % static_cast<std::uint64_t>(vocabulary_size()));
            switch (rng() % 3) {
            case 0: toks[pos] = tok; break;
            case 1: toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(pos), tok); break;
            default: toks.erase(toks.begin() + static_cast<std::ptrdiff_t>(pos));
            }
        }
        try {
            (void)detokenize(toks);
            ++accepted;
        } catch (const SyntaxError& e) {
            EXPECT_LE(e.position, toks.size());
            ++rejected;
        }
    }
    EXPECT_GT(rejected, 0);
}

TEST(Tokens, RefusesProgramsWhoseLinksWouldBeAmbiguous)
{
    // two registers with one encoding; a curve naming the older one cannot be
    // written by value
    ConstructionSequence s;
    s.prompt.datum = {0.0, 0.0};
    s.prompt.bbox = {{-0.5, -0.5}, {0.5, 0.5}};
    s.parameters = {{0, ParamKind::Length, 0.25}};
    s.program.push_back(Step{StepKind::LineOffsetLine, {Operand::reg(1), Operand::param(0)}, {3}});
    s.program.push_back(Step{StepKind::LineOffsetLine, {Operand::reg(1), Operand::param(0)}, {4}});
    s.program.push_back(Step{StepKind::LineXLine, {Operand::reg(3), Operand::reg(2)}, {5}});
    EXPECT_THROW(tokenize(s), TokenizeError);
}
