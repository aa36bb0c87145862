#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "shred/shape.hpp"

namespace shred {

/// Parses the SHRD1 text format:
///
///   SHRD1 <N> <has_gt:0|1>
///   x y z nx ny nz [gt_label [semantic_id]]     (N lines)
///
/// Lines starting with '#' and blank lines are ignored. Positions are kept
/// in model units.
Shape read_shape(std::istream& in, const std::string& id);

/// Reads a SHRD1 file; the shape id is the file stem. Positions are mapped
/// into the unit ball when `normalize` is set.
Shape load_shape(const std::filesystem::path& path, bool normalize = true);

/// Writes SHRD1 with round-trip precision.
void write_shape(std::ostream& out, const Shape& shape);
void save_shape(const std::filesystem::path& path, const Shape& shape);

}  // namespace shred
