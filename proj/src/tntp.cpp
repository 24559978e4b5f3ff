#include "netdesign/tntp.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "netdesign/errors.hpp"
#include "netdesign/rng.hpp"

namespace netdesign {

namespace {

struct Line {
  std::string_view text;
  std::size_t number;  // 1-based
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0, number = 1;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view line = end == std::string_view::npos
                                ? text.substr(start)
                                : text.substr(start, end - start);
    lines.push_back({line, number});
    if (end == std::string_view::npos) break;
    start = end + 1;
    ++number;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Drop everything from the first `~` on (comment marker), then trim.
std::string_view strip_comment(std::string_view s) {
  if (std::size_t pos = s.find('~'); pos != std::string_view::npos)
    s = s.substr(0, pos);
  return trim(s);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])))
      ++i;
    if (i > start) tokens.push_back(s.substr(start, i - start));
  }
  return tokens;
}

double parse_double_tok(std::string_view tok, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("cannot parse number '" + std::string(tok) + "'", line);
  return value;
}

int parse_int_tok(std::string_view tok, std::size_t line) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("cannot parse integer '" + std::string(tok) + "'", line);
  return value;
}

// `<TAG> value`; tag is upper-cased with whitespace runs collapsed, so the
// usual spelling variations in library files all match.
bool metadata_line(std::string_view s, std::size_t line, std::string* tag,
                   std::string_view* value) {
  if (s.empty() || s.front() != '<') return false;
  std::size_t close = s.find('>');
  if (close == std::string_view::npos)
    throw ParseError("unterminated metadata tag", line);
  std::string_view inner = trim(s.substr(1, close - 1));
  tag->clear();
  bool pending_space = false;
  for (char c : inner) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !tag->empty();
    } else {
      if (pending_space) tag->push_back(' ');
      pending_space = false;
      tag->push_back(
          static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  *value = trim(s.substr(close + 1));
  return true;
}

int metadata_int(std::string_view value, const std::string& tag,
                 std::size_t line) {
  if (value.empty()) throw ParseError("<" + tag + "> has no value", line);
  return parse_int_tok(value, line);
}

void check_nonnegative(double v, const char* field, std::size_t line) {
  if (v < 0.0)
    throw ParseError(std::string(field) + " must be nonnegative, got " +
                         format_number(v),
                     line);
}

}  // namespace

double RawTripTable::demand_sum() const {
  double sum = 0.0;
  for (const TripEntry& e : entries) sum += e.demand;
  return sum;
}

RawTntpNetwork parse_network(std::string_view text) {
  RawTntpNetwork net;
  long declared_links = -1;
  for (Line ln : split_lines(text)) {
    std::string_view s = strip_comment(ln.text);
    if (s.empty()) continue;

    std::string tag;
    std::string_view value;
    if (metadata_line(s, ln.number, &tag, &value)) {
      if (tag == "NUMBER OF ZONES")
        net.zone_count = metadata_int(value, tag, ln.number);
      else if (tag == "NUMBER OF NODES")
        net.node_count = metadata_int(value, tag, ln.number);
      else if (tag == "FIRST THRU NODE")
        net.first_thru_node = metadata_int(value, tag, ln.number);
      else if (tag == "NUMBER OF LINKS")
        declared_links = metadata_int(value, tag, ln.number);
      // Other tags (<ORIGINAL HEADER>, <END OF METADATA>, ...) carry no data.
      continue;
    }

    // One or more link rows, `;`-separated; a missing final `;` is fine.
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t end = s.find(';', pos);
      std::string_view segment =
          end == std::string_view::npos ? s.substr(pos) : s.substr(pos, end - pos);
      pos = end == std::string_view::npos ? s.size() + 1 : end + 1;
      std::vector<std::string_view> tok = split_ws(segment);
      if (tok.empty()) continue;
      if (tok.size() != 10)
        throw ParseError("link row has " + std::to_string(tok.size()) +
                             " fields, expected 10",
                         ln.number);
      if (net.node_count <= 0)
        throw ParseError("link row before <NUMBER OF NODES> header",
                         ln.number);

      RawTntpLink link;
      link.init_node = parse_int_tok(tok[0], ln.number);
      link.term_node = parse_int_tok(tok[1], ln.number);
      link.capacity = parse_double_tok(tok[2], ln.number);
      link.length = parse_double_tok(tok[3], ln.number);
      link.free_flow_time = parse_double_tok(tok[4], ln.number);
      link.b = parse_double_tok(tok[5], ln.number);
      link.power = parse_double_tok(tok[6], ln.number);
      link.speed = parse_double_tok(tok[7], ln.number);
      link.toll = parse_double_tok(tok[8], ln.number);
      link.link_type = parse_double_tok(tok[9], ln.number);

      for (int id : {link.init_node, link.term_node}) {
        if (id < 1 || id > net.node_count)
          throw ParseError("node id " + std::to_string(id) +
                               " out of range [1, " +
                               std::to_string(net.node_count) + "]",
                           ln.number);
      }
      if (link.capacity <= 0.0)
        throw ParseError(
            "capacity must be positive, got " + format_number(link.capacity),
            ln.number);
      check_nonnegative(link.length, "length", ln.number);
      check_nonnegative(link.free_flow_time, "free_flow_time", ln.number);
      check_nonnegative(link.b, "b", ln.number);
      check_nonnegative(link.power, "power", ln.number);
      net.links.push_back(link);
    }
  }

  if (net.node_count <= 0) throw ParseError("missing <NUMBER OF NODES> header");
  if (declared_links < 0) throw ParseError("missing <NUMBER OF LINKS> header");
  if (declared_links != static_cast<long>(net.links.size()))
    throw ParseError("file declares " + std::to_string(declared_links) +
                     " links but contains " + std::to_string(net.links.size()));
  if (net.first_thru_node < 1 || net.first_thru_node > net.node_count)
    throw ParseError("<FIRST THRU NODE> " +
                     std::to_string(net.first_thru_node) +
                     " out of range [1, " + std::to_string(net.node_count) +
                     "]");
  return net;
}

RawTripTable parse_trips(std::string_view text) {
  RawTripTable table;
  double declared_total = 0.0;
  bool have_total = false;
  int current_origin = -1;
  // Demand entries may wrap across lines, so tokens are buffered per origin
  // block and consumed as (destination ':' value) groups; ';' is a separator.
  struct Token {
    std::string text;
    std::size_t line;
  };
  std::vector<Token> pending;
  std::map<std::pair<int, int>, double> demands;

  auto flush_block = [&]() {
    std::size_t i = 0;
    while (i < pending.size()) {
      const Token& dest_tok = pending[i];
      int dest = parse_int_tok(dest_tok.text, dest_tok.line);
      if (i + 1 >= pending.size() || pending[i + 1].text != ":")
        throw ParseError("expected ':' after destination " +
                             std::to_string(dest),
                         dest_tok.line);
      if (i + 2 >= pending.size())
        throw ParseError(
            "missing demand value for destination " + std::to_string(dest),
            pending[i + 1].line);
      double value = parse_double_tok(pending[i + 2].text, pending[i + 2].line);
      if (value < 0.0)
        throw ParseError("negative demand " + format_number(value),
                         pending[i + 2].line);
      if (dest < 1 || dest > table.zone_count)
        throw ParseError("destination id " + std::to_string(dest) +
                             " out of range [1, " +
                             std::to_string(table.zone_count) + "]",
                         dest_tok.line);
      demands[{current_origin, dest}] += value;
      i += 3;
    }
    pending.clear();
  };

  for (Line ln : split_lines(text)) {
    std::string_view s = strip_comment(ln.text);
    if (s.empty()) continue;

    std::string tag;
    std::string_view value;
    if (metadata_line(s, ln.number, &tag, &value)) {
      if (tag == "NUMBER OF ZONES")
        table.zone_count = metadata_int(value, tag, ln.number);
      else if (tag == "TOTAL OD FLOW") {
        declared_total = parse_double_tok(value, ln.number);
        have_total = true;
      }
      continue;
    }

    if (std::isalpha(static_cast<unsigned char>(s.front()))) {
      std::vector<std::string_view> tok = split_ws(s);
      if (tok.size() != 2 || tok[0] != "Origin")
        throw ParseError("expected 'Origin <zone>' block header", ln.number);
      flush_block();
      if (table.zone_count <= 0)
        throw ParseError("origin block before <NUMBER OF ZONES> header",
                         ln.number);
      current_origin = parse_int_tok(tok[1], ln.number);
      if (current_origin < 1 || current_origin > table.zone_count)
        throw ParseError("origin id " + std::to_string(current_origin) +
                             " out of range [1, " +
                             std::to_string(table.zone_count) + "]",
                         ln.number);
      continue;
    }

    if (current_origin < 0)
      throw ParseError("demand entry before any 'Origin' header", ln.number);
    // Space out ':' so glued entries like "2 :3.5;" tokenize cleanly; ';'
    // tokens are dropped entirely (a missing final ';' is then harmless).
    std::string padded;
    padded.reserve(s.size() + 8);
    for (char c : s) {
      if (c == ':') {
        padded += " : ";
      } else if (c == ';') {
        padded += ' ';
      } else {
        padded += c;
      }
    }
    std::size_t i = 0;
    while (i < padded.size()) {
      while (i < padded.size() &&
             std::isspace(static_cast<unsigned char>(padded[i])))
        ++i;
      std::size_t start = i;
      while (i < padded.size() &&
             !std::isspace(static_cast<unsigned char>(padded[i])))
        ++i;
      if (i > start)
        pending.push_back(Token{padded.substr(start, i - start), ln.number});
    }
  }

  flush_block();

  if (table.zone_count <= 0)
    throw ParseError("missing <NUMBER OF ZONES> header");

  double sum = 0.0;
  for (const auto& [key, demand] : demands) {
    table.entries.push_back({key.first, key.second, demand});
    sum += demand;
  }
  if (have_total) {
    double tol = 1e-6 * std::max(1.0, std::abs(declared_total));
    if (std::abs(sum - declared_total) > tol)
      throw ParseError("total demand mismatch: entries sum to " +
                       format_number(sum) + " but header declares " +
                       format_number(declared_total));
    table.total_flow = declared_total;
  } else {
    table.total_flow = sum;
  }
  return table;
}

std::string write_network(const RawTntpNetwork& net) {
  std::string out;
  if (net.zone_count > 0)
    out += "<NUMBER OF ZONES> " + std::to_string(net.zone_count) + "\n";
  out += "<NUMBER OF NODES> " + std::to_string(net.node_count) + "\n";
  out += "<FIRST THRU NODE> " + std::to_string(net.first_thru_node) + "\n";
  out += "<NUMBER OF LINKS> " + std::to_string(net.links.size()) + "\n";
  out += "<END OF METADATA>\n\n";
  out +=
      "~ init_node term_node capacity length free_flow_time b power speed "
      "toll link_type ;\n";
  for (const RawTntpLink& link : net.links) {
    out += std::to_string(link.init_node) + "\t" +
           std::to_string(link.term_node) + "\t" +
           format_number(link.capacity) + "\t" + format_number(link.length) +
           "\t" + format_number(link.free_flow_time) + "\t" +
           format_number(link.b) + "\t" + format_number(link.power) + "\t" +
           format_number(link.speed) + "\t" + format_number(link.toll) + "\t" +
           format_number(link.link_type) + "\t;\n";
  }
  return out;
}

std::string write_trips(const RawTripTable& trips) {
  std::string out;
  out += "<NUMBER OF ZONES> " + std::to_string(trips.zone_count) + "\n";
  out += "<TOTAL OD FLOW> " + format_number(trips.total_flow) + "\n";
  out += "<END OF METADATA>\n";
  int current_origin = -1;
  int on_line = 0;
  for (const TripEntry& e : trips.entries) {
    if (e.origin != current_origin) {
      if (on_line > 0) out += "\n";
      out += "\nOrigin " + std::to_string(e.origin) + "\n";
      current_origin = e.origin;
      on_line = 0;
    }
    out += "    " + std::to_string(e.destination) + " : " +
           format_number(e.demand) + ";";
    if (++on_line == 4) {
      out += "\n";
      on_line = 0;
    }
  }
  if (on_line > 0) out += "\n";
  return out;
}

std::vector<RawTripTable> sample_scenarios(const RawTripTable& base,
                                           const InstanceSpec& spec) {
  if (spec.scenario_count < 1)
    throw std::invalid_argument("scenario_count must be at least 1");
  if (spec.scenario_low > spec.scenario_high)
    throw std::invalid_argument("scenario_low exceeds scenario_high");

  SplitMix64 rng(spec.seed);
  std::vector<RawTripTable> scenarios;
  scenarios.reserve(static_cast<std::size_t>(spec.scenario_count));
  for (int s = 0; s < spec.scenario_count; ++s) {
    RawTripTable table = base;
    double sum = 0.0;
    for (TripEntry& e : table.entries) {
      e.demand *= rng.uniform(spec.scenario_low, spec.scenario_high);
      sum += e.demand;
    }
    table.total_flow = sum;
    scenarios.push_back(std::move(table));
  }
  return scenarios;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RawTntpNetwork load_network_file(const std::string& path) {
  try {
    return parse_network(read_text_file(path));
  } catch (const ParseError& e) {
    // e.what() already carries the line number; just prepend the path.
    throw ParseError(path + ": " + e.what());
  }
}

RawTripTable load_trips_file(const std::string& path) {
  try {
    return parse_trips(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace netdesign
