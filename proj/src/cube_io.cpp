#include "mirspec/cube_io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace mirspec {

namespace {

static_assert(std::endian::native == std::endian::little,
              "SCUBE I/O assumes a little-endian host");
static_assert(sizeof(float) == 4 && sizeof(double) == 8);

constexpr char kMagic[4] = {'S', 'C', 'U', 'B'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in)
        throw Error("length-mismatch", "truncated SCUBE stream");
    return value;
}

void put_string(std::ostream& out, const std::string& s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max())
        throw Error("bad-meta", "identifier longer than 65535 bytes");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const auto len = get<std::uint16_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw Error("length-mismatch", "truncated SCUBE string field");
    return s;
}

}  // namespace

std::size_t write_scube(const SpectralCube& cube, std::ostream& out) {
    cube.validate();
    const std::streampos start = out.tellp();
    out.write(kMagic, 4);
    put<std::uint16_t>(out, kVersion);
    put<std::uint32_t>(out, cube.width);
    put<std::uint32_t>(out, cube.height);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(cube.channels()));
    put<double>(out, cube.meta.pixel_size_um);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(cube.mode));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(cube.meta.tissue_class));
    put_string(out, cube.meta.core_id);
    put_string(out, cube.meta.patient_id);
    out.write(reinterpret_cast<const char*>(cube.axis.values.data()),
              static_cast<std::streamsize>(cube.axis.values.size() * 8));
    out.write(reinterpret_cast<const char*>(cube.data.data()),
              static_cast<std::streamsize>(cube.data.size() * 4));
    if (!out) throw Error("io", "failed to write SCUBE stream");
    return static_cast<std::size_t>(out.tellp() - start);
}

std::size_t write_scube(const SpectralCube& cube, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open for writing: " + path);
    return write_scube(cube, out);
}

SpectralCube read_scube(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw Error("bad-magic", "not a SCUBE stream");
    const auto version = get<std::uint16_t>(in);
    if (version != kVersion)
        throw Error("bad-version",
                    "unsupported SCUBE version " + std::to_string(version));

    SpectralCube cube;
    cube.width = get<std::uint32_t>(in);
    cube.height = get<std::uint32_t>(in);
    const auto k = get<std::uint32_t>(in);
    cube.meta.pixel_size_um = get<double>(in);
    const auto mode = get<std::uint8_t>(in);
    if (mode > 1)
        throw Error("bad-mode", "unknown mode byte " + std::to_string(mode));
    cube.mode = static_cast<SpectrumMode>(mode);
    const auto cls = get<std::uint8_t>(in);
    if (cls != 0 && cls != 1 && cls != 255)
        throw Error("bad-class", "unknown class byte " + std::to_string(cls));
    cube.meta.tissue_class = static_cast<TissueClass>(cls);
    cube.meta.core_id = get_string(in);
    cube.meta.patient_id = get_string(in);

    cube.axis.values.resize(k);
    in.read(reinterpret_cast<char*>(cube.axis.values.data()),
            static_cast<std::streamsize>(std::size_t(k) * 8));
    if (!in) throw Error("length-mismatch", "axis shorter than header K");

    const std::size_t count =
        static_cast<std::size_t>(cube.width) * cube.height * k;
    cube.data.resize(count);
    in.read(reinterpret_cast<char*>(cube.data.data()),
            static_cast<std::streamsize>(count * 4));
    if (!in || static_cast<std::size_t>(in.gcount()) != count * 4)
        throw Error("length-mismatch", "data block shorter than header claims");
    in.peek();
    if (!in.eof())
        throw Error("length-mismatch", "trailing bytes after data block");

    cube.validate();
    return cube;
}

SpectralCube read_scube(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open for reading: " + path);
    return read_scube(in);
}

namespace {

void append_number(std::string& out, double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.9g", v);
    out.append(buf, static_cast<std::size_t>(n));
}

void check_identifier(const std::string& s) {
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw Error("bad-meta", "identifier contains CSV delimiter: " + s);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_number(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw Error("bad-number", "unparsable number '" + s + "' on line " +
                                      std::to_string(line_no));
    return v;
}

}  // namespace

void export_csv(const SpectraTable& table, std::ostream& out) {
    table.validate();
    std::string line = "x_um,y_um,core_id,patient_id,label";
    for (double v : table.axis.values) {
        line += ",w";
        char buf[40];
        const int n = std::snprintf(buf, sizeof buf, "%.10g", v);
        line.append(buf, static_cast<std::size_t>(n));
    }
    line += '\n';
    out.write(line.data(), static_cast<std::streamsize>(line.size()));

    for (std::size_t i = 0; i < table.row_count(); ++i) {
        const auto& row = table.rows[i];
        check_identifier(row.core_id);
        check_identifier(row.patient_id);
        line.clear();
        append_number(line, row.x_um);
        line += ',';
        append_number(line, row.y_um);
        line += ',';
        line += row.core_id;
        line += ',';
        line += row.patient_id;
        line += ',';
        line += to_string(row.label);
        for (float v : table.spectrum(i)) {
            line += ',';
            append_number(line, v);
        }
        line += '\n';
        out.write(line.data(), static_cast<std::streamsize>(line.size()));
    }
    if (!out) throw Error("io", "failed to write CSV stream");
}

void export_csv(const SpectraTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open for writing: " + path);
    export_csv(table, out);
}

SpectraTable import_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw Error("missing-columns", "empty CSV stream");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_line(line);
    const char* expected[] = {"x_um", "y_um", "core_id", "patient_id", "label"};
    if (header.size() < 6)
        throw Error("missing-columns",
                    "CSV header needs the 5 metadata columns plus at least "
                    "one w<wavenumber> column");
    for (std::size_t i = 0; i < 5; ++i) {
        if (header[i] != expected[i])
            throw Error("missing-columns", "expected column '" +
                                               std::string(expected[i]) +
                                               "', found '" + header[i] + "'");
    }

    SpectraTable table;
    for (std::size_t i = 5; i < header.size(); ++i) {
        const auto& h = header[i];
        if (h.size() < 2 || h[0] != 'w')
            throw Error("missing-columns",
                        "channel column must look like w<wavenumber>: '" + h +
                            "'");
        table.axis.values.push_back(parse_number(h.substr(1), 1));
    }
    table.axis.validate();

    const std::size_t k = table.channels();
    std::vector<float> spectrum(k);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != 5 + k)
            throw Error("ragged-row",
                        "line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(5 + k));
        SpectraTable::Row row;
        row.x_um = parse_number(fields[0], line_no);
        row.y_um = parse_number(fields[1], line_no);
        row.core_id = fields[2];
        row.patient_id = fields[3];
        row.label = tissue_class_from_string(fields[4]);
        for (std::size_t c = 0; c < k; ++c)
            spectrum[c] = static_cast<float>(parse_number(fields[5 + c], line_no));
        table.append_row(std::move(row), spectrum);
    }
    return table;
}

SpectraTable import_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open for reading: " + path);
    return import_csv(in);
}

}  // namespace mirspec
