#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lookplan {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
std::string format_fixed(double value, int decimals);

double parse_double(std::string_view text, const std::string& context);
long parse_long(std::string_view text, const std::string& context);

// RFC-4180-ish: fields with commas/quotes/newlines are double-quoted.
std::string csv_escape(std::string_view field);
std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace lookplan
