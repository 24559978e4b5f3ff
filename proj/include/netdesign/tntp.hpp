#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace netdesign {

// Raw contents of Transportation Networks library files. These structs are
// faithful images of the text files; unit conversions and cost modelling
// happen later, in the instance layer.

struct RawTntpLink {
  int init_node = 0;  // 1-based
  int term_node = 0;  // 1-based
  double capacity = 0.0;
  double length = 0.0;
  double free_flow_time = 0.0;
  double b = 0.0;
  double power = 0.0;
  double speed = 0.0;      // pass-through
  double toll = 0.0;       // pass-through
  double link_type = 0.0;  // pass-through

  bool operator==(const RawTntpLink&) const = default;
};

struct RawTntpNetwork {
  int zone_count = 0;  // 0 when the file has no zones header
  int node_count = 0;
  int first_thru_node = 1;  // parsed and stored, not used for routing
  std::vector<RawTntpLink> links;  // file order

  bool operator==(const RawTntpNetwork&) const = default;
};

struct TripEntry {
  int origin = 0;       // 1-based zone id
  int destination = 0;  // 1-based zone id
  double demand = 0.0;

  bool operator==(const TripEntry&) const = default;
};

struct RawTripTable {
  int zone_count = 0;
  double total_flow = 0.0;         // declared (or recomputed) total
  std::vector<TripEntry> entries;  // sorted by (origin, destination)

  double demand_sum() const;

  bool operator==(const RawTripTable&) const = default;
};

// Recipe for turning a network + trip table into a design instance.
struct InstanceSpec {
  double removal_fraction = 0.02;  // fraction of arcs made removable
  int scenario_count = 0;          // 0 = deterministic instance
  double scenario_low = 1.0;       // demand scaling interval
  double scenario_high = 1.1;
  std::uint64_t seed = 0;
  double toll_factor = 0.0;      // weight of tolls in the constant edge cost
  double distance_factor = 0.0;  // weight of length in the constant edge cost
};

/// Parses a `_net.tntp` file. Tolerates `~` comments, unknown metadata tags,
/// and missing trailing semicolons. Throws ParseError (with a 1-based line
/// number) on malformed headers, rows without exactly 10 fields, node ids out
/// of range, or a row count that disagrees with <NUMBER OF LINKS>.
RawTntpNetwork parse_network(std::string_view text);

/// Parses a `_trips.tntp` file. Entries may wrap across lines; repeated
/// (origin, destination) pairs accumulate. Throws ParseError when a zone id
/// is out of range or the parsed demand total differs from <TOTAL OD FLOW>
/// by more than a relative 1e-6.
RawTripTable parse_trips(std::string_view text);

/// Canonical serializers; parse(write(v)) == v, and write-out of a file that
/// is already in canonical form reproduces its tokens exactly.
std::string write_network(const RawTntpNetwork& net);
std::string write_trips(const RawTripTable& trips);

/// Draws `spec.scenario_count` demand tables; every entry of `base` is scaled
/// by an independent uniform draw from [scenario_low, scenario_high). Totals
/// are recomputed. Deterministic in `spec.seed`.
std::vector<RawTripTable> sample_scenarios(const RawTripTable& base,
                                           const InstanceSpec& spec);

/// Shortest round-trip decimal representation, used by all serializers.
std::string format_number(double value);

std::string read_text_file(const std::string& path);
RawTntpNetwork load_network_file(const std::string& path);
RawTripTable load_trips_file(const std::string& path);

}  // namespace netdesign
