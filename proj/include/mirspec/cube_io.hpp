#pragma once

#include <iosfwd>
#include <string>

#include "mirspec/types.hpp"

namespace mirspec {

// SCUBE v1 container, all multi-byte values little-endian:
//   magic "SCUB" | version u16 (=1) | width u32 | height u32 | K u32 |
//   pixel_size f64 | mode u8 | tissue_class u8 |
//   core_id u16+UTF-8 | patient_id u16+UTF-8 |
//   axis K x f64 | data width*height*K x f32 row-major [row][col][channel]
// Returns the number of bytes written. The cube is validated first and
// nothing is written if any invariant fails.
std::size_t write_scube(const SpectralCube& cube, std::ostream& out);
std::size_t write_scube(const SpectralCube& cube, const std::string& path);

// Parses and validates; throws Error("bad-magic" | "bad-version" |
// "length-mismatch" | "bad-axis" | ...) without returning a partial cube.
SpectralCube read_scube(std::istream& in);
SpectralCube read_scube(const std::string& path);

// CSV interchange: header `x_um,y_um,core_id,patient_id,label,w<v1>,...`,
// one spectrum per row, label in {NC, CRC, UNLABELED}. Numbers are written
// with 9 significant digits, which round-trips float32 exactly.
void export_csv(const SpectraTable& table, std::ostream& out);
void export_csv(const SpectraTable& table, const std::string& path);
SpectraTable import_csv(std::istream& in);
SpectraTable import_csv(const std::string& path);

}  // namespace mirspec
