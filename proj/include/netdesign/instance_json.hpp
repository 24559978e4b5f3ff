#pragma once

#include <string>

#include "json.hpp"

#include "netdesign/instance.hpp"

namespace netdesign {

// Self-contained instance files: graph, polynomial costs, demand scenarios
// with their big-M totals, and the priced removable set, so solver runs
// never need the original TNTP inputs. Node ids are 1-based in the file
// (matching the input format); removable entries are 0-based edge indices.
// The writer is canonical — equal instances serialize to identical bytes.

inline constexpr const char* kInstanceFormatName = "netdesign-instance";
inline constexpr int kInstanceFormatVersion = 1;

nlohmann::ordered_json instance_to_json(const NetworkInstance& inst);

/// Rebuilds an instance from its JSON form and runs the full structural
/// validation. Throws ParseError on wrong format/version or missing keys
/// and std::invalid_argument when the embedded data is inconsistent (for
/// example a zone_total that does not match its demand column).
NetworkInstance instance_from_json(const nlohmann::json& j);

std::string write_instance(const NetworkInstance& inst);
NetworkInstance read_instance(const std::string& text);

void save_instance_file(const NetworkInstance& inst, const std::string& path);
NetworkInstance load_instance_file(const std::string& path);

}  // namespace netdesign
