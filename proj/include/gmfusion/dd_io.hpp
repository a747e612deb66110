#ifndef GMFUSION_DD_IO_HPP
#define GMFUSION_DD_IO_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gmfusion/error.hpp"
#include "gmfusion/model.hpp"
#include "gmfusion/trace.hpp"

namespace gmfusion {

//
// Graph matching instance in `.dd` format:
//
//   c <comment>
//   p <n_left> <n_right> <#assignments> <#pairwise terms>
//   a <id> <left> <right> <cost>
//   e <id1> <id2> <cost>
//
struct dd_instance {
  struct assignment_line {
    index id;
    index left;
    index right;
    cost value;
    friend bool operator==(const assignment_line&, const assignment_line&) = default;
  };

  struct pairwise_line {
    index id1;
    index id2;
    cost value;
    friend bool operator==(const pairwise_line&, const pairwise_line&) = default;
  };

  index n_left = 0;
  index n_right = 0;
  std::vector<assignment_line> assignments;
  std::vector<pairwise_line> pairwise_terms;

  friend bool operator==(const dd_instance&, const dd_instance&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_tokens(std::string_view line)
{
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
      ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t')
      ++i;
    if (i > start)
      tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

// getline that also strips a trailing CR.
inline bool read_line(std::istream& in, std::string& line)
{
  if (!std::getline(in, line))
    return false;
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  return true;
}

template<typename T>
T parse_number(std::string_view token, std::size_t line, const char* what)
{
  T value{};
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw parse_error(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  return value;
}

// Shortest representation that reads back to the same double.
inline std::string format_exact(double value)
{
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

inline std::string format_6g(double value)
{
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

inline void check_stream(const std::ostream& out)
{
  if (!out)
    throw io_error("write failed");
}

}

inline dd_instance parse_dd(std::istream& in)
{
  using detail::parse_number;
  dd_instance d;
  bool have_header = false;
  std::size_t expected_assignments = 0, expected_pairwise = 0;
  std::vector<std::size_t> id_line;  // line of the `a` entry per id, 0 = unseen
  std::vector<std::size_t> pairwise_lines;

  std::string line;
  std::size_t line_no = 0;
  while (detail::read_line(in, line)) {
    ++line_no;
    const auto tokens = detail::split_tokens(line);
    if (tokens.empty() || tokens[0][0] == 'c')
      continue;

    const auto kind = tokens[0];
    if (kind == "p") {
      if (have_header)
        throw parse_error(line_no, "duplicate header");
      if (tokens.size() != 5)
        throw parse_error(line_no, "header needs 4 fields");
      d.n_left = parse_number<index>(tokens[1], line_no, "left count");
      d.n_right = parse_number<index>(tokens[2], line_no, "right count");
      expected_assignments = parse_number<index>(tokens[3], line_no, "assignment count");
      expected_pairwise = parse_number<index>(tokens[4], line_no, "pairwise count");
      id_line.assign(expected_assignments, 0);
      have_header = true;
    } else if (kind == "a") {
      if (!have_header)
        throw parse_error(line_no, "assignment before header");
      if (tokens.size() != 5)
        throw parse_error(line_no, "assignment line needs 4 fields");
      dd_instance::assignment_line a{
        parse_number<index>(tokens[1], line_no, "assignment id"),
        parse_number<index>(tokens[2], line_no, "left index"),
        parse_number<index>(tokens[3], line_no, "right index"),
        parse_number<cost>(tokens[4], line_no, "cost")};
      if (a.id >= expected_assignments)
        throw parse_error(line_no, "assignment id " + std::to_string(a.id) + " out of range");
      if (id_line[a.id] != 0)
        throw parse_error(line_no, "duplicate assignment id " + std::to_string(a.id));
      if (a.left >= d.n_left)
        throw parse_error(line_no, "left index " + std::to_string(a.left) + " out of range");
      if (a.right >= d.n_right)
        throw parse_error(line_no, "right index " + std::to_string(a.right) + " out of range");
      id_line[a.id] = line_no;
      d.assignments.push_back(a);
    } else if (kind == "e") {
      if (!have_header)
        throw parse_error(line_no, "pairwise term before header");
      if (tokens.size() != 4)
        throw parse_error(line_no, "pairwise line needs 3 fields");
      dd_instance::pairwise_line e{
        parse_number<index>(tokens[1], line_no, "assignment id"),
        parse_number<index>(tokens[2], line_no, "assignment id"),
        parse_number<cost>(tokens[3], line_no, "cost")};
      if (e.id1 >= expected_assignments || e.id2 >= expected_assignments)
        throw parse_error(line_no, "pairwise term references an assignment id out of range");
      d.pairwise_terms.push_back(e);
      pairwise_lines.push_back(line_no);
    } else {
      throw parse_error(line_no, "unknown line type '" + std::string(kind) + "'");
    }
  }

  // Errors found at the end of input point at the last line.
  line_no = std::max<std::size_t>(line_no, 1);
  if (!have_header)
    throw parse_error(line_no, "missing header");
  if (d.assignments.size() != expected_assignments)
    throw parse_error(line_no, "header announces " + std::to_string(expected_assignments) + " assignments, found "
                      + std::to_string(d.assignments.size()));
  if (d.pairwise_terms.size() != expected_pairwise)
    throw parse_error(line_no, "header announces " + std::to_string(expected_pairwise) + " pairwise terms, found "
                      + std::to_string(d.pairwise_terms.size()));

  std::vector<index> left_of(expected_assignments);
  for (const auto& a : d.assignments)
    left_of[a.id] = a.left;
  for (index k = 0; k < d.pairwise_terms.size(); ++k) {
    const auto& e = d.pairwise_terms[k];
    if (left_of[e.id1] == left_of[e.id2])
      throw parse_error(pairwise_lines[k], "pairwise term between assignments of the same left point");
  }
  return d;
}

inline void write_dd(std::ostream& out, const dd_instance& d)
{
  out << "p " << d.n_left << ' ' << d.n_right << ' ' << d.assignments.size() << ' ' << d.pairwise_terms.size() << '\n';
  for (const auto& a : d.assignments)
    out << "a " << a.id << ' ' << a.left << ' ' << a.right << ' ' << detail::format_exact(a.value) << '\n';
  for (const auto& e : d.pairwise_terms)
    out << "e " << e.id1 << ' ' << e.id2 << ' ' << detail::format_exact(e.value) << '\n';
  detail::check_stream(out);
}

//
// Nodes are left points, labels are right points; theta_u(#) = 0 and every
// pairwise entry not listed (including those with a dummy) is 0. Repeated
// pairwise terms accumulate.
//
inline problem to_problem(const dd_instance& d)
{
  problem_builder builder(d.n_left, d.n_right);
  const index num_ids = d.assignments.size();
  std::vector<const dd_instance::assignment_line*> by_id(num_ids, nullptr);
  for (const auto& a : d.assignments) {
    if (a.id >= num_ids || by_id[a.id] != nullptr)
      throw input_error("assignment ids must be unique and in [0, " + std::to_string(num_ids) + ")");
    by_id[a.id] = &a;
    builder.add_label(a.left, a.right, a.value);
  }
  for (const auto& e : d.pairwise_terms) {
    if (e.id1 >= num_ids || e.id2 >= num_ids)
      throw input_error("pairwise term references an unknown assignment");
    const auto& a1 = *by_id[e.id1];
    const auto& a2 = *by_id[e.id2];
    if (a1.left == a2.left)
      throw input_error("pairwise term between assignments " + std::to_string(e.id1) + " and "
                        + std::to_string(e.id2) + " of the same left point");
    builder.add_pairwise(a1.left, a1.right, a2.left, a2.right, e.value);
  }
  return builder.build();
}

//
// Proposal files: one assignment per line, |V| integers, -1 for the dummy.
//
inline std::vector<assignment> parse_proposals(std::istream& in, const problem& p)
{
  std::vector<assignment> result;
  std::string line;
  std::size_t line_no = 0;
  while (detail::read_line(in, line)) {
    ++line_no;
    const auto tokens = detail::split_tokens(line);
    if (tokens.empty())
      continue;
    if (tokens.size() != p.num_nodes())
      throw parse_error(line_no, "expected " + std::to_string(p.num_nodes()) + " labels, found "
                        + std::to_string(tokens.size()));
    assignment x(p.num_nodes());
    for (index u = 0; u < tokens.size(); ++u) {
      const auto value = detail::parse_number<std::int64_t>(tokens[u], line_no, "label");
      if (value == -1) {
        x[u] = dummy_label;
      } else if (value < 0 || !p.slot_of(u, static_cast<label>(value))) {
        throw parse_error(line_no, "label " + std::string(tokens[u]) + " is not a candidate of node "
                          + std::to_string(u));
      } else {
        x[u] = static_cast<label>(value);
      }
    }
    result.push_back(std::move(x));
  }
  return result;
}

inline void write_proposal(std::ostream& out, const assignment& x)
{
  for (index u = 0; u < x.size(); ++u) {
    if (u > 0)
      out << ' ';
    if (x[u] == dummy_label)
      out << -1;
    else
      out << x[u];
  }
  out << '\n';
  detail::check_stream(out);
}

inline void write_proposals(std::ostream& out, const std::vector<assignment>& xs)
{
  for (const auto& x : xs)
    write_proposal(out, x);
}

//
// Solver traces as CSV. Reals carry 6 significant digits; a missing best
// energy is an empty field.
//
inline constexpr std::string_view trace_header = "iteration,elapsed_seconds,dual_bound,best_energy,event";

inline void write_trace(std::ostream& out, const std::vector<trace_record>& records)
{
  out << trace_header << '\n';
  for (const auto& r : records) {
    out << r.iteration << ',' << detail::format_6g(r.elapsed_seconds) << ',' << detail::format_6g(r.dual_bound) << ',';
    if (r.best_energy)
      out << detail::format_6g(*r.best_energy);
    out << ',' << r.event << '\n';
  }
  out.flush();
  detail::check_stream(out);
}

inline std::vector<trace_record> parse_trace(std::istream& in)
{
  using detail::parse_number;
  std::vector<trace_record> records;
  std::string line;
  std::size_t line_no = 0;
  if (!detail::read_line(in, line) || line != trace_header)
    throw parse_error(1, "missing trace header");
  ++line_no;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos)
        break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 5)
      throw parse_error(line_no, "trace rows need 5 fields");
    trace_record r;
    r.iteration = parse_number<std::int64_t>(fields[0], line_no, "iteration");
    r.elapsed_seconds = parse_number<double>(fields[1], line_no, "elapsed time");
    r.dual_bound = parse_number<double>(fields[2], line_no, "dual bound");
    if (!fields[3].empty())
      r.best_energy = parse_number<double>(fields[3], line_no, "energy");
    r.event = std::string(fields[4]);
    records.push_back(std::move(r));
  }
  return records;
}

}

#endif
