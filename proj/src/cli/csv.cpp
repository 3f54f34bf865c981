#include "billiard_thermo/cli/csv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <fmt/format.h>
#include <fmt/os.h>

namespace bt::cli {

Cell::Cell(double v) : text_(fmt::format("{}", v)) {}
Cell::Cell(std::int64_t v) : text_(fmt::format("{}", v)) {}
Cell::Cell(std::uint64_t v) : text_(fmt::format("{}", v)) {}

struct CsvWriter::Impl {
    explicit Impl(const std::filesystem::path& p) : file(fmt::output_file(p.string())) {}
    fmt::ostream file;
};

CsvWriter::CsvWriter(std::filesystem::path path, std::string_view schema, int version, const Metadata& meta,
                     std::vector<std::string> columns)
    : path_(std::move(path)), columns_(columns.size()) {
    if (columns.empty()) throw std::invalid_argument("CsvWriter: no columns");
    part_ = path_;
    part_ += ".part";
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    impl_ = std::make_unique<Impl>(part_);
    impl_->file.print("# schema: {} v{}\n", schema, version);
    for (const auto& [k, v] : meta) impl_->file.print("# {}: {}\n", k, v);
    impl_->file.print("{}\n", fmt::join(columns, ","));
}

CsvWriter::~CsvWriter() {
    if (!impl_) return;
    try {
        impl_->file.close();
    } catch (...) {
    }
    std::error_code ec;
    std::filesystem::remove(part_, ec);
}

void CsvWriter::row(std::initializer_list<Cell> cells) { row(std::vector<Cell>(cells)); }

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (!impl_) throw std::logic_error("CsvWriter: row after close");
    if (cells.size() != columns_)
        throw std::invalid_argument(fmt::format("CsvWriter: {} cells for {} columns", cells.size(), columns_));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) impl_->file.print(",");
        impl_->file.print("{}", cells[i].text());
    }
    impl_->file.print("\n");
    ++rows_;
}

void CsvWriter::close() {
    if (!impl_) return;
    impl_->file.close();
    impl_.reset();
    std::filesystem::rename(part_, path_);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
    CsvTable t;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (!header && line.starts_with("# ")) {
            const auto colon = line.find(": ");
            if (colon == std::string::npos) continue;
            std::string key = line.substr(2, colon - 2), value = line.substr(colon + 2);
            if (key == "schema") {
                const auto sp = value.rfind(" v");
                t.schema = value.substr(0, sp);
                if (sp != std::string::npos) t.version = std::stoi(value.substr(sp + 2));
            } else {
                t.meta.emplace_back(std::move(key), std::move(value));
            }
            continue;
        }
        if (!header) {
            t.columns = split(line);
            header = true;
            continue;
        }
        t.rows.push_back(split(line));
    }
    return t;
}

}  // namespace bt::cli
