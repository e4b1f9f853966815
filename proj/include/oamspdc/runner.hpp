#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "oamspdc/analysis.hpp"
#include "oamspdc/config.hpp"

namespace oamspdc {

/// Files written by a run, relative to the output directory.
struct RunArtifacts {
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

/// Executes the configured experiment and writes its artifacts:
/// scan    -> coincidence_map.csv, singles_map.csv
/// triple  -> rates.txt
/// analyze -> fit.txt
/// full    -> all of the above (analyze reads the scan's CSV)
/// Every run also writes defaults.txt, the effective-configuration dump.
/// Identical config + seed give byte-identical files. Files are written to a
/// temp name and renamed into place.
RunArtifacts run(const RunConfig& config);

/// Map CSV round trip (header x_cm,y_cm,value; row-major; 6 significant
/// digits).
std::string map_to_csv(const MapGrid& map);
MapGrid map_from_csv_text(const std::string& text);
MapGrid map_from_csv(const std::filesystem::path& path);

/// Extracts a MapGrid from a scan result: which = 0 takes coincidences,
/// which = 1 takes the movable detector's singles.
MapGrid scan_to_map(const ScanResult& scan, int which);

/// Report bodies (also used by the golden-file tests).
std::string rates_report(const RateSummary& summary);
std::string fit_report(const TwoSpotFit& fit, double inferred_l);

} // namespace oamspdc
