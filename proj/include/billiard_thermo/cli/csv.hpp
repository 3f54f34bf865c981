#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bt::cli {

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// One CSV cell. Doubles are written in shortest round-trip form, so equal
/// values always give equal bytes.
class Cell {
public:
    Cell(double v);
    Cell(std::int64_t v);
    Cell(int v) : Cell(static_cast<std::int64_t>(v)) {}
    Cell(std::uint64_t v);
    Cell(bool v) : text_(v ? "1" : "0") {}
    Cell(std::string_view v) : text_(v) {}
    Cell(const char* v) : text_(v) {}
    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

/// Comma-separated, '.' decimal, header row, '#'-prefixed metadata lines.
/// The first line is "# schema: <name> v<version>". Rows go to `<path>.part`
/// and the file is renamed into place by close(); a writer destroyed without
/// close() removes its partial output.
class CsvWriter {
public:
    CsvWriter(std::filesystem::path path, std::string_view schema, int version, const Metadata& meta,
              std::vector<std::string> columns);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    /// Throws std::invalid_argument when the cell count does not match the header.
    void row(std::initializer_list<Cell> cells);
    void row(const std::vector<Cell>& cells);
    void close();

    std::int64_t rows() const noexcept { return rows_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    struct Impl;
    std::filesystem::path path_;
    std::filesystem::path part_;
    std::size_t columns_;
    std::int64_t rows_ = 0;
    std::unique_ptr<Impl> impl_;
};

/// Reads back a file written by CsvWriter: metadata, header and raw rows.
struct CsvTable {
    std::string schema;
    int version = 0;
    Metadata meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace bt::cli
