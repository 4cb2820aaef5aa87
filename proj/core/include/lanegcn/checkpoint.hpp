#pragma once

#include <string>

#include "lanegcn/nn.hpp"

namespace lanegcn {

// Versioned binary parameter table. Little-endian byte layout:
//
//   magic   8 bytes   "LGCNCKPT"
//   version u32       currently 1
//   count   u64       number of entries
//   entry*  repeated  u32 name length, name bytes,
//                     u32 rank, i64 extents[rank],
//                     f64 values[product(extents)]
//
// Entries appear in parameter creation order. Loading matches strictly by
// name and shape and requires the file and the store to hold exactly the
// same parameter set.
void save_checkpoint(const std::string& path, const ParameterStore& params);
void load_checkpoint(const std::string& path, ParameterStore& params);

}  // namespace lanegcn
