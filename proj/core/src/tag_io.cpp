#include "qrelay/tag_io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace qrelay {

namespace {

constexpr char kMagic[4] = {'Q', 'R', 'T', 'T'};

void put_u16(std::ostream& os, std::uint16_t v) {
  const std::array<char, 2> b = {static_cast<char>(v & 0xff),
                                 static_cast<char>((v >> 8) & 0xff)};
  os.write(b.data(), b.size());
}

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), b.size());
}

std::uint16_t get_u16(std::istream& is) {
  std::array<unsigned char, 2> b{};
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::kD1: return "D1";
    case Channel::kD2: return "D2";
    case Channel::kD3: return "D3";
    case Channel::kD4:
    default: return "D4";
  }
}

}  // namespace

void write_tag_dump(const std::string& path, const TimeTagStream& tags,
                    std::uint64_t config_hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_tag_dump: cannot open " + path);
  os.write(kMagic, 4);
  put_u16(os, kTagDumpVersion);
  put_u64(os, config_hash);
  put_u64(os, tags.size());
  for (const auto& tag : tags) {
    const char ch = static_cast<char>(tag.channel);
    os.write(&ch, 1);
    put_u64(os, static_cast<std::uint64_t>(tag.t_ps));
  }
  if (!os) throw std::runtime_error("write_tag_dump: write failed for " + path);
}

TagDump read_tag_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_tag_dump: cannot open " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw std::runtime_error("read_tag_dump: bad magic in " + path);
  }
  TagDump dump;
  dump.version = get_u16(is);
  if (dump.version != kTagDumpVersion) {
    throw std::runtime_error("read_tag_dump: unsupported version in " + path);
  }
  dump.config_hash = get_u64(is);
  const std::uint64_t count = get_u64(is);
  dump.tags.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    char ch = 0;
    is.read(&ch, 1);
    const std::uint64_t t = get_u64(is);
    if (!is) throw std::runtime_error("read_tag_dump: truncated file " + path);
    if (ch < 0 || ch > 3) throw std::runtime_error("read_tag_dump: bad channel in " + path);
    dump.tags.push_back({static_cast<Channel>(ch), static_cast<std::int64_t>(t)});
  }
  return dump;
}

void write_tags_csv(const std::string& path, const TimeTagStream& tags) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_tags_csv: cannot open " + path);
  os << "channel,t_ps\n";
  for (const auto& tag : tags) {
    os << channel_name(tag.channel) << ',' << tag.t_ps << '\n';
  }
}

}  // namespace qrelay
