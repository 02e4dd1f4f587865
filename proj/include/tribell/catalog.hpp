#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tribell/scenario.hpp"

namespace tribell {

/// Parses the catalog JSON array. Throws ParseError (with line or field
/// location) and DuplicateIdError.
std::vector<BellFunctional> parse_catalog(std::string_view text);

std::vector<BellFunctional> load_catalog(const std::filesystem::path& path);

/// Inverse of parse_catalog; emits one entry per line group, stable order.
std::string catalog_to_json(const std::vector<BellFunctional>& catalog);

/// FNV-1a over the canonical JSON form, as 16 hex digits.
std::string catalog_hash(const std::vector<BellFunctional>& catalog);

/// Looks an entry up by id; throws KeyMismatch if absent.
const BellFunctional& find_functional(const std::vector<BellFunctional>& catalog, std::string_view id);

/// Path of the catalog shipped with the sources.
std::filesystem::path default_catalog_path();

}  // namespace tribell
