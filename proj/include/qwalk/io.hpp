#ifndef QWALK_IO_HPP
#define QWALK_IO_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/continuum.hpp"
#include "qwalk/entanglement.hpp"
#include "qwalk/ring.hpp"

namespace qwalk {
namespace io {

/// Config-file problem, addressed to the offending line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error(format(line, what)), line_(line) {}
    int line() const { return line_; }

private:
    static std::string format(int line, const std::string& what);
    int line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exit codes of run()/run_preset(): 0 ok, 2 config validation failure,
// 3 numerical invariant breach, 4 I/O failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

/// Fixed 17-significant-digit scientific notation used in every CSV cell.
std::string csv_double(double v);

struct RingSeriesSpec {
    enum class Quantity { Ep, P1, Entropy };
    std::string name;           // becomes the CSV column header
    RingConfig ring;
    std::pair<int, int> initial;
    std::set<int> alice;
    Quantity quantity = Quantity::Ep;
};

struct GammaSpec {
    std::string name;
    RingConfig ring;
    std::pair<int, int> initial;
    std::vector<double> gt_list;
};

struct ContinuumRunSpec {
    std::string name;
    ContinuumConfig base;       // statistics field ignored; see run_* flags
    bool run_fermion = true;
    bool run_boson = true;
    double output_every_fs = 25.0;
    std::string file;
};

struct SweepSpec {
    std::vector<int> n_values;
    std::vector<Statistics> statistics;
    double gt_step = 0.25;
    std::string file = "saturation.csv";
};

struct ExperimentConfig {
    enum class Mode { Ring, Continuum, RingSweep };
    Mode mode = Mode::Ring;

    // ring mode
    double gt_min = 0.0, gt_max = 0.0;
    int gt_points = 0;
    std::vector<RingSeriesSpec> series;
    std::vector<GammaSpec> gamma_maps;
    std::string ring_file;      // CSV for the series block

    // continuum mode
    std::vector<ContinuumRunSpec> continuum_runs;

    // sweep mode
    SweepSpec sweep;

    std::string out_dir = ".";
    std::string prefix;         // filename prefix for gamma maps
};

/// Parses the documented key-value config format; throws ConfigError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Writes the N x N joint-detection map under the symmetrized convention
/// (off-diagonal canonical weight split between (k,j) and (j,k); the full
/// matrix sums to 1) plus a JSON metadata sidecar at <path>.json.
void emit_gamma_map(const PairState& state, const std::filesystem::path& path,
                    std::pair<int, int> initial);

struct SaturationRow {
    int n_sites = 0;
    Statistics statistics = Statistics::Fermion;
    SaturationEstimate estimate;
};

/// Estimates gamma*tau for each N in the sweep (half-ring partition,
/// adjacent straddling initial state). Estimator failures are flagged rows.
std::vector<SaturationRow> sweep_saturation(const SweepSpec& sweep);

/// Executes a parsed experiment; writes all declared artifacts. Throws
/// ConfigError / NumericalError / IoError.
void execute(const ExperimentConfig& cfg);

/// Entry points used by the CLI: map exceptions onto exit codes and report
/// to the given stream. `out_dir_override` (e.g. from QWALK_OUT_DIR) wins
/// over the config's own [output] dir.
int run(const std::filesystem::path& config_path, std::ostream& err,
        const std::optional<std::string>& out_dir_override = std::nullopt);
int run_preset(const std::string& name, std::ostream& err,
               const std::optional<std::string>& out_dir_override = std::nullopt);

/// Embedded preset config texts, keyed by name (fig1..fig5, saturation).
const std::map<std::string, std::string>& preset_texts();

} // namespace io
} // namespace qwalk

#endif
