#include "qfcsim/tag_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qfcsim/error.hpp"

namespace qfcsim::io {
namespace {

constexpr std::array<char, 4> kMagic{'P', 'T', 'T', '1'};

template <typename T>
void put_le(std::ostream& out, T value)
{
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(const unsigned char* p)
{
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(p[i]) << (8 * i);
    return value;
}

std::uint32_t resolution_fs(double resolution)
{
    const double fs = resolution * 1e15;
    const double rounded = std::round(fs);
    if (rounded < 1.0 || rounded > 4294967295.0 || std::abs(fs - rounded) > 1e-6 * rounded)
        throw InvalidArgument("resolution " + std::to_string(resolution) +
                              " s is not representable as whole femtoseconds in 32 bits");
    return static_cast<std::uint32_t>(rounded);
}

}  // namespace

void write_ptt(std::ostream& out, const TimeTagStream& stream)
{
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, resolution_fs(stream.resolution()));
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(stream.channel_count()));
    const std::array<char, 6> reserved{};
    out.write(reserved.data(), reserved.size());
    for (const auto& t : stream.tags()) {
        out.put(static_cast<char>(t.channel));
        put_le<std::uint64_t>(out, t.ticks);
    }
    if (!out) throw DataError("failed writing PTT1 stream");
}

void write_ptt(const std::filesystem::path& path, const TimeTagStream& stream)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write_ptt(out, stream);
}

TimeTagStream read_ptt(std::istream& in)
{
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < kPttHeaderSize)
        throw DataError("truncated PTT1 header at byte offset " + std::to_string(bytes.size()) + " (need 16 bytes)");
    for (std::size_t i = 0; i < kMagic.size(); ++i)
        if (bytes[i] != static_cast<unsigned char>(kMagic[i]))
            throw DataError("bad PTT1 magic at byte offset " + std::to_string(i));
    const auto fs = get_le<std::uint32_t>(&bytes[4]);
    if (fs == 0) throw DataError("zero resolution at byte offset 4");
    const auto channels = get_le<std::uint16_t>(&bytes[8]);
    if (channels == 0 || channels > 256)
        throw DataError("channel count " + std::to_string(channels) + " out of range at byte offset 8");
    for (std::size_t i = 10; i < kPttHeaderSize; ++i)
        if (bytes[i] != 0) throw DataError("non-zero reserved byte at byte offset " + std::to_string(i));

    const std::size_t body = bytes.size() - kPttHeaderSize;
    if (body % kPttRecordSize != 0) {
        const std::size_t offset = kPttHeaderSize + (body / kPttRecordSize) * kPttRecordSize;
        throw DataError("truncated PTT1 record at byte offset " + std::to_string(offset));
    }
    const double resolution = static_cast<double>(fs) * 1e-15;
    std::vector<TimeTag> tags(body / kPttRecordSize);
    std::uint64_t last = 0;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const std::size_t offset = kPttHeaderSize + i * kPttRecordSize;
        tags[i].channel = bytes[offset];
        if (tags[i].channel >= channels)
            throw DataError("channel " + std::to_string(tags[i].channel) + " >= channel count at byte offset " +
                            std::to_string(offset));
        tags[i].ticks = get_le<std::uint64_t>(&bytes[offset + 1]);
        last = std::max(last, tags[i].ticks);
    }
    return TimeTagStream(resolution, channels, std::move(tags), static_cast<double>(last) * resolution);
}

TimeTagStream read_ptt(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return read_ptt(in);
}

void write_tag_csv(std::ostream& out, const TimeTagStream& stream)
{
    out << "channel,ticks\n";
    for (const auto& t : stream.tags()) out << static_cast<unsigned>(t.channel) << ',' << t.ticks << '\n';
}

TimeTagStream read_tag_csv(std::istream& in, double resolution)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("channel,ticks", 0) != 0)
        throw DataError("tag CSV line 1: expected header \"channel,ticks\"");
    std::vector<TimeTag> tags;
    unsigned max_channel = 0;
    std::uint64_t last = 0;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        unsigned channel = 0;
        std::uint64_t ticks = 0;
        const char* begin = line.data();
        const char* end = begin + line.size();
        bool ok = comma != std::string::npos;
        if (ok) {
            auto r1 = std::from_chars(begin, begin + comma, channel);
            auto r2 = std::from_chars(begin + comma + 1, end, ticks);
            ok = r1.ec == std::errc{} && r1.ptr == begin + comma && r2.ec == std::errc{} && r2.ptr == end &&
                 channel < 256;
        }
        if (!ok) throw DataError("tag CSV line " + std::to_string(lineno) + ": malformed record \"" + line + "\"");
        tags.push_back({ticks, static_cast<std::uint8_t>(channel)});
        max_channel = std::max(max_channel, channel);
        last = std::max(last, ticks);
    }
    return TimeTagStream(resolution, max_channel + 1, std::move(tags), static_cast<double>(last) * resolution);
}

TimeTagStream read_tags(const std::filesystem::path& path, double csv_resolution)
{
    if (path.extension() == ".csv") {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open " + path.string());
        return read_tag_csv(in, csv_resolution);
    }
    return read_ptt(path);
}

}  // namespace qfcsim::io
