#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace qrelay {

// Detector channels: D1/D2 are the Bell-measurement PBS outputs at Charlie
// (H and V respectively), D3/D4 are Bob's analyzer outputs.
enum class Channel : std::uint8_t { kD1 = 0, kD2 = 1, kD3 = 2, kD4 = 3 };

struct TimeTag {
  Channel channel;
  std::int64_t t_ps;  // >= 0, integer picoseconds
};

using TimeTagStream = std::vector<TimeTag>;

inline bool tag_less(const TimeTag& a, const TimeTag& b) {
  if (a.t_ps != b.t_ps) return a.t_ps < b.t_ps;
  return static_cast<int>(a.channel) < static_cast<int>(b.channel);
}

inline void sort_tags(TimeTagStream& s) { std::sort(s.begin(), s.end(), tag_less); }

inline bool is_sorted_stream(const TimeTagStream& s) {
  return std::is_sorted(s.begin(), s.end(), tag_less);
}

}  // namespace qrelay
