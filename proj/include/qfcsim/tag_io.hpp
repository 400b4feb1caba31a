#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "qfcsim/time_tag.hpp"

namespace qfcsim::io {

// PTT1 layout: 16-byte header ("PTT1", u32 LE resolution in fs, u16 LE channel
// count, 6 zero bytes) followed by 9-byte records (u8 channel, u64 LE ticks).
inline constexpr std::size_t kPttHeaderSize = 16;
inline constexpr std::size_t kPttRecordSize = 9;

void write_ptt(std::ostream& out, const TimeTagStream& stream);
void write_ptt(const std::filesystem::path& path, const TimeTagStream& stream);

/// Throws DataError with the byte offset of the first malformed field.
/// The stream duration is taken as the last tick times the resolution.
TimeTagStream read_ptt(std::istream& in);
TimeTagStream read_ptt(const std::filesystem::path& path);

/// CSV form: header "channel,ticks" then one record per line. The resolution
/// is not part of the CSV and is supplied by the caller.
void write_tag_csv(std::ostream& out, const TimeTagStream& stream);
TimeTagStream read_tag_csv(std::istream& in, double resolution = kDefaultResolution);

/// Files ending in .csv are read as tag CSV, everything else as PTT1.
TimeTagStream read_tags(const std::filesystem::path& path, double csv_resolution = kDefaultResolution);

}  // namespace qfcsim::io
