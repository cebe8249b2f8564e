#include <charconv>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "waa/harness.hpp"

namespace waa {

namespace {

constexpr const char* kColumns[] = {
    "n",          "stage",      "stage_round",        "stage_change",      "beta",
    "own_loss",   "mixture_loss", "cum_own_loss",     "best_expert_loss",  "lemma9_lhs",
    "lemma9_rhs", "lemma5_excess_best", "lemma5_bound_best",
};
constexpr std::size_t kColumnCount = sizeof(kColumns) / sizeof(kColumns[0]);

double parse_double(std::string_view field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::invalid_argument("trace: bad number '" + std::string(field) + "'");
  return v;
}

std::size_t parse_count(std::string_view field) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::invalid_argument("trace: bad integer '" + std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string trace_header() {
  std::string h;
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i) h += ',';
    h += kColumns[i];
  }
  return h;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string format_row(const TraceRow& r) {
  std::string s;
  s.reserve(256);
  s += std::to_string(r.n);
  s += ',' + std::to_string(r.stage);
  s += ',' + std::to_string(r.stage_round);
  s += r.stage_change ? ",1" : ",0";
  for (double v : {r.beta, r.own_loss, r.mixture_loss, r.cum_own_loss, r.best_expert_loss, r.lemma9_lhs, r.lemma9_rhs,
                   r.lemma5_excess_best, r.lemma5_bound_best}) {
    s += ',';
    s += format_double(v);
  }
  return s;
}

std::vector<TraceRow> parse_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_header()) throw std::invalid_argument("trace: unexpected header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kColumnCount) throw std::invalid_argument("trace: wrong column count at row " + std::to_string(rows.size() + 1));
    TraceRow r;
    r.n = parse_count(f[0]);
    r.stage = parse_count(f[1]);
    r.stage_round = parse_count(f[2]);
    r.stage_change = parse_count(f[3]) != 0;
    r.beta = parse_double(f[4]);
    r.own_loss = parse_double(f[5]);
    r.mixture_loss = parse_double(f[6]);
    r.cum_own_loss = parse_double(f[7]);
    r.best_expert_loss = parse_double(f[8]);
    r.lemma9_lhs = parse_double(f[9]);
    r.lemma9_rhs = parse_double(f[10]);
    r.lemma5_excess_best = parse_double(f[11]);
    r.lemma5_bound_best = parse_double(f[12]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace waa
