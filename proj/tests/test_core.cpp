#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "qfcsim/error.hpp"
#include "qfcsim/histogram.hpp"
#include "qfcsim/random.hpp"
#include "qfcsim/tag_io.hpp"
#include "qfcsim/time_tag.hpp"

using namespace qfcsim;

namespace {

TimeTagStream sample_stream()
{
    return TimeTagStream(4e-12, 3, {{10, 0}, {10, 2}, {25, 1}, {1000, 0}}, 1e-6);
}

std::string ptt_bytes(const TimeTagStream& s)
{
    std::ostringstream out;
    io::write_ptt(out, s);
    return out.str();
}

std::string error_of(const std::string& bytes)
{
    std::istringstream in(bytes);
    try {
        io::read_ptt(in);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("stream construction validates channels and extends the duration")
{
    CHECK_THROWS_AS(TimeTagStream(4e-12, 2, {{1, 2}}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(TimeTagStream(0.0, 1, {}, 1.0), InvalidArgument);
    const TimeTagStream s(1e-12, 1, {{5000, 0}}, 1e-9);
    CHECK(s.duration() >= 5e-9);
    CHECK(TimeTagStream::empty(4e-12, 2, 1.0).empty());
}

TEST_CASE("sort and merge keep tick then channel order")
{
    const TimeTagStream a(4e-12, 2, {{30, 1}, {10, 0}}, 1e-9);
    const TimeTagStream b(4e-12, 2, {{10, 1}, {20, 0}}, 1e-9);
    CHECK_FALSE(a.is_sorted());
    const auto m = merge_streams(a, b);
    REQUIRE(m.size() == 4);
    CHECK(m.is_sorted());
    CHECK(m.tags()[0] == TimeTag{10, 0});
    CHECK(m.tags()[1] == TimeTag{10, 1});
    CHECK(m.tags()[3] == TimeTag{30, 1});
}

TEST_CASE("merging streams with different resolutions names both")
{
    const TimeTagStream a(4e-12, 1, {}, 0.0), b(1e-12, 1, {}, 0.0);
    try {
        merge_streams(a, b);
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("4e-12") != std::string::npos);
        CHECK(msg.find("1e-12") != std::string::npos);
    }
}

TEST_CASE("to_ticks floors and rejects bad input")
{
    CHECK(to_ticks(1e-9, 4e-12) == 250);
    CHECK(to_ticks(0.0, 4e-12) == 0);
    CHECK(to_ticks(9.9e-12, 4e-12) == 2);
    CHECK_THROWS_AS(to_ticks(-1e-12, 4e-12), InvalidArgument);
    CHECK_THROWS_AS(to_ticks(1e9, 1e-15), InvalidArgument);
}

TEST_CASE("PTT1 round trip and exact layout")
{
    const auto s = sort_stream(sample_stream());
    const auto bytes = ptt_bytes(s);
    CHECK(bytes.size() == io::kPttHeaderSize + 4 * io::kPttRecordSize);
    CHECK(bytes.substr(0, 4) == "PTT1");
    // resolution 4000 fs little endian
    CHECK(static_cast<unsigned char>(bytes[4]) == 0xA0);
    CHECK(static_cast<unsigned char>(bytes[5]) == 0x0F);
    std::istringstream in(bytes);
    const auto back = io::read_ptt(in);
    CHECK(back.resolution() == doctest::Approx(4e-12));
    CHECK(back.channel_count() == 3);
    CHECK(std::equal(back.tags().begin(), back.tags().end(), s.tags().begin(), s.tags().end()));
}

TEST_CASE("empty PTT1 stream is valid")
{
    const auto bytes = ptt_bytes(TimeTagStream::empty(4e-12, 2, 0.0));
    CHECK(bytes.size() == io::kPttHeaderSize);
    std::istringstream in(bytes);
    CHECK(io::read_ptt(in).empty());
}

TEST_CASE("malformed PTT1 reports byte offsets")
{
    const auto good = ptt_bytes(sort_stream(sample_stream()));
    auto bad_magic = good;
    bad_magic[2] = 'X';
    CHECK(error_of(bad_magic).find("magic at byte offset 2") != std::string::npos);
    CHECK(error_of(good.substr(0, 10)).find("header") != std::string::npos);
    const auto truncated = good.substr(0, good.size() - 3);
    CHECK(error_of(truncated).find("record at byte offset " + std::to_string(io::kPttHeaderSize + 3 * 9)) !=
          std::string::npos);
    auto bad_channel = good;
    bad_channel[io::kPttHeaderSize + 9] = 7;
    CHECK(error_of(bad_channel).find("byte offset " + std::to_string(io::kPttHeaderSize + 9)) != std::string::npos);
    auto reserved = good;
    reserved[12] = 1;
    CHECK(error_of(reserved).find("reserved byte at byte offset 12") != std::string::npos);
}

TEST_CASE("tag CSV round trip and line-numbered errors")
{
    const auto s = sort_stream(sample_stream());
    std::ostringstream out;
    io::write_tag_csv(out, s);
    std::istringstream in(out.str());
    const auto back = io::read_tag_csv(in, 4e-12);
    CHECK(std::equal(back.tags().begin(), back.tags().end(), s.tags().begin(), s.tags().end()));

    std::istringstream broken("channel,ticks\n0,10\n1,abc\n");
    try {
        io::read_tag_csv(broken);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("histogram CSV round trip keeps normalization and sigma")
{
    CorrelationHistogram h;
    h.bin_width = 256e-12;
    h.first_index = -2;
    h.counts = {1, 2, 3, 4, 5};
    h.mode = HistogramMode::cross_correlation;
    h.max_delay = 512e-12;
    h.normalization = 2.5;
    h.sigma = std::vector<double>(5, 0.125);
    std::ostringstream out;
    io::write_histogram_csv(out, h);
    std::istringstream in(out.str());
    const auto back = io::read_histogram_csv(in);
    CHECK(back.had_sigma_column);
    const auto& b = back.histogram;
    CHECK(b.first_index == -2);
    CHECK(b.counts == h.counts);
    CHECK(b.mode == h.mode);
    REQUIRE(b.normalization);
    CHECK(*b.normalization == doctest::Approx(2.5));
    REQUIRE(b.zero_bin());
    CHECK(*b.zero_bin() == 2);
    CHECK(b.bin_width == doctest::Approx(256e-12));
    std::ostringstream again;
    io::write_histogram_csv(again, b);
    CHECK(again.str() == out.str());
}

TEST_CASE("histogram CSV parse errors carry the line number")
{
    std::istringstream in("# bin_width_ns=0.256\ndelay_ns,counts,normalized,sigma\n0.0,1,,\n0.256,x,,\n");
    try {
        io::read_histogram_csv(in);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("merge_histograms adds counts and checks layout")
{
    CorrelationHistogram a;
    a.bin_width = 1e-9;
    a.counts = {1, 2};
    auto b = a;
    b.counts = {3, 4};
    CHECK(merge_histograms(a, b).counts == std::vector<double>{4, 6});
    b.first_index = 1;
    CHECK_THROWS(merge_histograms(a, b));
}

TEST_CASE("RandomSource is a pure function of seed, stream and counter")
{
    RandomSource a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
        CHECK(x != d.next_u64());
    }
    CHECK(a.substream(1).next_u64() == b.substream(1).next_u64());
    CHECK(a.substream(1).next_u64() != a.substream(2).next_u64());
}

TEST_CASE("RandomSource distributions have the right moments")
{
    RandomSource r(11, 0);
    const int n = 200000;
    double su = 0, se = 0, sn = 0, sn2 = 0, sp = 0, sp2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        se += r.exponential(2.0);
        const double z = r.normal(1.0, 3.0);
        sn += z;
        sn2 += z * z;
        const double k = static_cast<double>(r.poisson(4.5));
        sp += k;
        sp2 += k * k;
    }
    // 4-sigma bands on the sample means.
    CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(se / n - 2.0) < 4 * 2.0 / std::sqrt(n));
    CHECK(std::abs(sn / n - 1.0) < 4 * 3.0 / std::sqrt(n));
    CHECK(std::sqrt(sn2 / n - (sn / n) * (sn / n)) == doctest::Approx(3.0).epsilon(0.01));
    CHECK(std::abs(sp / n - 4.5) < 4 * std::sqrt(4.5 / n));
    CHECK(sp2 / n - (sp / n) * (sp / n) == doctest::Approx(4.5).epsilon(0.02));
    CHECK(r.poisson(0.0) == 0);
    RandomSource big(5, 5);
    double sb = 0;
    for (int i = 0; i < 2000; ++i) sb += static_cast<double>(big.poisson(1500.0));
    CHECK(std::abs(sb / 2000 - 1500.0) < 4 * std::sqrt(1500.0 / 2000));
}
