#pragma once

// Fixed CSV dialect: comma separator, '.' decimal, header row, LF endings.
// Doubles use the shortest round-trip representation so output bytes are
// identical for identical values.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace jumpflux {

inline std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

/// Opens a file for CSV output in binary mode (no CRLF translation).
inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace jumpflux
