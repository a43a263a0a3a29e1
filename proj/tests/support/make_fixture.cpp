// Writes a synthetic nine-series FRED-style dataset plus an ingest config so
// the CLI tests can exercise the ingest -> evaluate -> report chain.

#include <filesystem>
#include <iostream>
#include <string>

#include "macrocast/ingest.hpp"
#include "support/test_util.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixture <dir>\n";
        return 1;
    }
    namespace fs = std::filesystem;
    const fs::path dir = argv[1];
    fs::create_directories(dir / "data");

    // series run past the panel window so ingestion has to slice
    const macrocast::Panel panel = test_util::synthetic_panel(245, 20250810);
    std::string config = "{\n  \"panel_start\": \"2005-01\",\n  \"panel_end\": \"2025-02\",\n  \"series\": [\n";
    bool first = true;
    auto add = [&](const macrocast::Series& s, const char* role) {
        const std::string file = "data/" + s.name() + ".csv";
        macrocast::write_series_csv(s, dir / file, s.name());
        if (!first) config += ",\n";
        first = false;
        config += "    {\"role\": \"" + std::string(role) + "\", \"name\": \"" + s.name() +
                  "\", \"path\": \"" + (dir / file).string() + "\", \"column\": \"" + s.name() +
                  "\"}";
    };
    for (std::size_t i = 0; i < 3; ++i) add(panel.target(i), "target");
    for (std::size_t i = 0; i < 6; ++i) add(panel.feature(i), "feature");
    config += "\n  ]\n}\n";
    macrocast::write_file_atomic(dir / "ingest.json", config);
    std::cout << "fixture ready at " << dir.string() << "\n";
    return 0;
}
