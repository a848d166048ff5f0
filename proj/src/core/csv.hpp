#pragma once

#include <string>

namespace odb {

// Floats are printed with 9 significant digits everywhere ("%.9g");
// infinities print as "inf"/"-inf".
std::string fmt_g9(double x);

// Writes via a temp file in the same directory, then renames.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace odb
