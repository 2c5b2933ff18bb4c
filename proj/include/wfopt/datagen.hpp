#pragma once

#include "wfopt/table.hpp"

namespace wfopt {

/// Synthetic-table request: uniform independent integer attributes with the
/// given distinct counts, optionally arranged sorted or grouped on one
/// attribute. Deterministic under the seed, byte for byte.
struct GenSpec {
  std::vector<std::pair<std::string, uint64_t>> columns; // name, distinct
  uint64_t rows = 0;
  uint64_t seed = 1;
  std::string order = "none"; // none | sorted | grouped
  std::string order_attr;
  size_t block_bytes = kDefaultBlockBytes;
};

/// The web_sales-shaped default: the five benchmark attributes plus a
/// quantity column.
GenSpec default_gen_spec(uint64_t rows, uint64_t seed);

/// Generates the table and its stats sidecar. Returns the final metadata
/// (exact observed distinct counts, physical order property).
TableMeta gen_data(const GenSpec &spec, const std::filesystem::path &out);

} // namespace wfopt
