#pragma once

#include <cstdint>
#include <string>

#include "qrelay/time_tags.hpp"

namespace qrelay {

// Binary tag-dump format: magic "QRTT", u16 version, u64 config hash,
// u64 record count, then (u8 channel, u64 t_ps) records.  All integers
// little-endian.
inline constexpr std::uint16_t kTagDumpVersion = 1;

struct TagDump {
  std::uint16_t version = kTagDumpVersion;
  std::uint64_t config_hash = 0;
  TimeTagStream tags;
};

void write_tag_dump(const std::string& path, const TimeTagStream& tags,
                    std::uint64_t config_hash);
TagDump read_tag_dump(const std::string& path);  // throws std::runtime_error

void write_tags_csv(const std::string& path, const TimeTagStream& tags);

}  // namespace qrelay
