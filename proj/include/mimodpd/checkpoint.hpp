#pragma once

#include <string>

#include "mimodpd/dpd.hpp"

namespace mimodpd {

/// JSON text holding the scheme, its structure metadata and every parameter
/// array. Doubles are written in shortest round-trip form, so
/// deserialize(serialize(m)) reproduces m bit for bit.
std::string serialize_dpd(const DpdModel& m);
/// Throws kConfig on malformed input or a structure/shape mismatch.
DpdModel deserialize_dpd(const std::string& text);

std::string serialize_gmp(const GmpModel& m);
GmpModel deserialize_gmp(const std::string& text);

void save_checkpoint(const std::string& path, const DpdModel& m);
DpdModel load_checkpoint(const std::string& path);

}  // namespace mimodpd
