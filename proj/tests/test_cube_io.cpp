#include "doctest.h"

#include <random>
#include <sstream>

#include "mirspec/cube_io.hpp"

using namespace mirspec;

namespace {

SpectralCube minimal_cube(float value = 100.0f) {
    SpectralCube cube;
    cube.width = cube.height = 1;
    cube.axis.values = {4000.0};
    cube.mode = SpectrumMode::TransmittancePercent;
    cube.meta.core_id = "c";
    cube.meta.patient_id = "";
    cube.meta.pixel_size_um = 25.0;
    cube.data = {value};
    return cube;
}

std::size_t header_bytes(const SpectralCube& cube) {
    return 4 + 2 + 4 + 4 + 4 + 8 + 1 + 1 + 2 + cube.meta.core_id.size() + 2 +
           cube.meta.patient_id.size();
}

SpectralCube random_cube(std::mt19937_64& engine) {
    std::uniform_int_distribution<std::uint32_t> dim_dist(1, 6);
    std::uniform_int_distribution<int> kd(1, 9);
    std::uniform_real_distribution<float> value(0.5f, 150.0f);

    SpectralCube cube;
    cube.width = dim_dist(engine);
    cube.height = dim_dist(engine);
    const int k = kd(engine);
    for (int i = 0; i < k; ++i) cube.axis.values.push_back(4000.0 - 4.0 * i);
    cube.mode = engine() % 2 ? SpectrumMode::Absorbance
                             : SpectrumMode::TransmittancePercent;
    cube.meta.core_id = "core" + std::to_string(engine() % 100);
    cube.meta.patient_id = "p" + std::to_string(engine() % 10);
    cube.meta.tissue_class =
        engine() % 2 ? TissueClass::CRC : TissueClass::NC;
    cube.meta.pixel_size_um = 12.5;
    cube.data.resize(cube.pixel_count() * cube.channels());
    for (auto& v : cube.data)
        v = cube.mode == SpectrumMode::Absorbance ? value(engine) - 75.0f
                                                  : value(engine);
    return cube;
}

}  // namespace

TEST_CASE("minimal cube writes exactly header+axis+4 bytes") {
    const auto cube = minimal_cube();
    std::stringstream buf;
    const std::size_t n = write_scube(cube, buf);
    CHECK(n == header_bytes(cube) + 8 + 4);
    CHECK(buf.str().size() == n);
}

TEST_CASE("canonical cube data block is 25,214,464 bytes") {
    SpectralCube cube;
    cube.width = cube.height = 88;
    cube.axis = WavenumberAxis::canonical();
    cube.mode = SpectrumMode::TransmittancePercent;
    cube.meta.core_id = "canon";
    cube.meta.patient_id = "p";
    cube.data.assign(cube.pixel_count() * cube.channels(), 50.0f);

    CHECK(cube.data.size() * 4 == 25214464u);
    std::stringstream buf;
    const std::size_t n = write_scube(cube, buf);
    CHECK(n == header_bytes(cube) + 814 * 8 + 25214464u);
}

TEST_CASE("write/read round-trip is bit exact for random cubes") {
    std::mt19937_64 engine(7);
    for (int i = 0; i < 20; ++i) {
        const auto cube = random_cube(engine);
        std::stringstream buf;
        write_scube(cube, buf);
        const auto back = read_scube(buf);
        CHECK(back == cube);
    }
}

TEST_CASE("bad magic is rejected") {
    std::stringstream buf("XXXXjunkjunkjunk");
    try {
        read_scube(buf);
        FAIL("expected bad-magic");
    } catch (const Error& e) {
        CHECK(e.code() == "bad-magic");
    }
}

TEST_CASE("header/payload length mismatch is rejected") {
    const auto cube = minimal_cube();
    std::stringstream buf;
    write_scube(cube, buf);
    std::string bytes = buf.str();

    SUBCASE("truncated axis") {
        // drop the last 8 bytes: the axis then eats into the data block
        std::stringstream shorter(bytes.substr(0, bytes.size() - 8));
        try {
            read_scube(shorter);
            FAIL("expected a length-mismatch error");
        } catch (const Error& e) {
            CHECK(e.code() == "length-mismatch");
        }
    }
    SUBCASE("header claims more channels than stored") {
        // K lives after magic+version+width+height
        bytes[14] = 2;
        std::stringstream tampered(bytes);
        try {
            read_scube(tampered);
            FAIL("expected a length-mismatch error");
        } catch (const Error& e) {
            CHECK(e.code() == "length-mismatch");
        }
    }
    SUBCASE("trailing garbage") {
        std::stringstream longer(bytes + "zz");
        try {
            read_scube(longer);
            FAIL("expected a length-mismatch error");
        } catch (const Error& e) {
            CHECK(e.code() == "length-mismatch");
        }
    }
}

TEST_CASE("invalid cubes are refused before any bytes are written") {
    auto cube = minimal_cube();
    cube.data.push_back(1.0f);  // wrong length now
    std::stringstream buf;
    CHECK_THROWS_AS(write_scube(cube, buf), Error);
    CHECK(buf.str().empty());

    auto nonpositive = minimal_cube(0.0f);
    std::stringstream buf2;
    CHECK_THROWS_AS(write_scube(nonpositive, buf2), Error);
    CHECK(buf2.str().empty());
}

TEST_CASE("canonical axis is 814 channels from 4000 to 748") {
    const auto axis = WavenumberAxis::canonical();
    CHECK(axis.size() == 814);
    CHECK(axis.values.front() == 4000.0);
    CHECK(axis.values.back() == 748.0);
    axis.validate();
}

namespace {

SpectraTable small_table() {
    SpectraTable table;
    table.axis.values = {4000.0, 3996.0, 3992.0};
    table.rows = {{-12.5, 12.5, "a", "p1", TissueClass::NC},
                  {12.5, -12.5, "b", "p2", TissueClass::CRC}};
    table.values = {0.1f, 0.2f, 0.3f, 1.5f, -0.25f, 0.75f};
    return table;
}

}  // namespace

TEST_CASE("CSV export/import round-trips a small table") {
    const auto table = small_table();
    std::stringstream buf;
    export_csv(table, buf);
    const auto back = import_csv(buf);

    REQUIRE(back.row_count() == 2);
    REQUIRE(back.channels() == 3);
    CHECK(back.axis.values == table.axis.values);
    CHECK(back.rows == table.rows);
    CHECK(back.values == table.values);
    CHECK(back.rows[0].label == TissueClass::NC);
    CHECK(back.rows[1].label == TissueClass::CRC);
}

TEST_CASE("CSV round-trip of a random 100-row table stays within 1e-8") {
    std::mt19937_64 engine(11);
    std::uniform_real_distribution<float> value(-3.0f, 3.0f);
    SpectraTable table;
    for (int i = 0; i < 8; ++i) table.axis.values.push_back(4000.0 - 4.0 * i);
    std::vector<float> spectrum(8);
    for (int r = 0; r < 100; ++r) {
        for (auto& v : spectrum) v = value(engine);
        table.append_row({r * 12.5, -r * 12.5, "c" + std::to_string(r % 5),
                          "p", r % 2 ? TissueClass::CRC : TissueClass::NC},
                         spectrum);
    }

    std::stringstream buf;
    export_csv(table, buf);
    const auto back = import_csv(buf);
    REQUIRE(back.row_count() == table.row_count());
    double drift = 0.0;
    for (std::size_t i = 0; i < table.values.size(); ++i)
        drift = std::max(drift, std::abs(double(back.values[i]) -
                                         double(table.values[i])));
    CHECK(drift < 1e-8);
    CHECK(back.values == table.values);  // 9 digits round-trips float32
}

TEST_CASE("CSV parse errors") {
    SUBCASE("missing metadata columns") {
        std::stringstream in("x_um,y_um,core_id\n");
        try {
            import_csv(in);
            FAIL("expected missing-columns");
        } catch (const Error& e) {
            CHECK(e.code() == "missing-columns");
        }
    }
    SUBCASE("no channel columns") {
        std::stringstream in("x_um,y_um,core_id,patient_id,label\n");
        CHECK_THROWS_AS(import_csv(in), Error);
    }
    SUBCASE("ragged row") {
        std::stringstream in(
            "x_um,y_um,core_id,patient_id,label,w4000\n"
            "0,0,a,p,NC,1.0,2.0\n");
        try {
            import_csv(in);
            FAIL("expected ragged-row");
        } catch (const Error& e) {
            CHECK(e.code() == "ragged-row");
        }
    }
    SUBCASE("unparsable number") {
        std::stringstream in(
            "x_um,y_um,core_id,patient_id,label,w4000\n"
            "0,0,a,p,NC,oops\n");
        try {
            import_csv(in);
            FAIL("expected bad-number");
        } catch (const Error& e) {
            CHECK(e.code() == "bad-number");
        }
    }
    SUBCASE("unknown label") {
        std::stringstream in(
            "x_um,y_um,core_id,patient_id,label,w4000\n"
            "0,0,a,p,MAYBE,1.0\n");
        try {
            import_csv(in);
            FAIL("expected bad-class");
        } catch (const Error& e) {
            CHECK(e.code() == "bad-class");
        }
    }
}
