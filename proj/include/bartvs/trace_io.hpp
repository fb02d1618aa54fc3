#ifndef BARTVS_TRACE_IO_HPP
#define BARTVS_TRACE_IO_HPP

#include "bartvs/trace.hpp"

#include <iosfwd>
#include <string>

namespace bartvs {

// Trace file layout (all integers little-endian):
//
//   "BVC1"  version:u8
//   section*  where section = tag:char[4] length:u64 payload[length]
//
//   HEAD  K:u64 p:u64 T:u64
//   NAME  p x (len:u32 bytes)
//   CONF  FitConfig as JSON text
//   CNTS  K*p i32, row major          INCL  K*p u8
//   SIG2  K f64                       LEAF  K*T i32
//   MFIT  K f64                       MOVE  8 i64
//   MILG  K x (m:u32, m x (feature:i32 accept_prob:f64))   optional
//   SPTH  K*p f64                     ALPH  K f64          optional
//   END!  (empty)
//
// Unknown tags are skipped on read so later versions can add sections.
inline constexpr char kTraceMagic[4] = {'B', 'V', 'C', '1'};
inline constexpr unsigned char kTraceVersion = 1;

void write_trace(std::ostream& out, const PosteriorTrace& trace);
PosteriorTrace read_trace(std::istream& in);

void save_trace(const std::string& path, const PosteriorTrace& trace);
PosteriorTrace load_trace(const std::string& path);

} // namespace bartvs

#endif // BARTVS_TRACE_IO_HPP
