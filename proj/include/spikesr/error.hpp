#ifndef SPIKESR_ERROR_HPP
#define SPIKESR_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace spikesr
{

enum class Errc
{
    invalid_argument,
    domain_error,
    undefined_separation,
    infeasible_geometry,
    out_of_band,
    wrong_sample_count,
    ratios_undefined,
    index_error,
    empty_input,
    shift_infeasible,
    degenerate_sample_set,
    solver_failure,
    model_order_unreachable,
    insufficient_consensus,
    cardinality_mismatch,
    amplitude_underflow,
    not_coprime,
    ambiguous_alias,
    factors_undefined,
    config_error,
};

constexpr std::string_view to_string(Errc code) noexcept
{
    switch (code)
    {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::domain_error: return "domain error";
    case Errc::undefined_separation: return "undefined separation";
    case Errc::infeasible_geometry: return "infeasible geometry";
    case Errc::out_of_band: return "out-of-band query";
    case Errc::wrong_sample_count: return "wrong sample count";
    case Errc::ratios_undefined: return "ratios undefined";
    case Errc::index_error: return "index error";
    case Errc::empty_input: return "empty input";
    case Errc::shift_infeasible: return "shift infeasible";
    case Errc::degenerate_sample_set: return "degenerate sample set";
    case Errc::solver_failure: return "solver failure";
    case Errc::model_order_unreachable: return "model order unreachable";
    case Errc::insufficient_consensus: return "insufficient consensus";
    case Errc::cardinality_mismatch: return "cardinality mismatch";
    case Errc::amplitude_underflow:
        return "amplitude underflow, de-aliasing unreliable";
    case Errc::not_coprime: return "rates not co-prime";
    case Errc::ambiguous_alias: return "ambiguous alias";
    case Errc::factors_undefined: return "factors undefined; report raw errors";
    case Errc::config_error: return "malformed configuration";
    }
    return "unknown error";
}

///
/// Library exception. Carries a machine-checkable code and, once it has
/// crossed a pipeline boundary, the tag of the stage that raised it.
///
class Error : public std::runtime_error
{
public:
    Error(Errc code, const std::string& detail, std::string stage = {})
        : std::runtime_error(format(code, detail, stage)),
          code_(code),
          detail_(detail),
          stage_(std::move(stage))
    {
    }

    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }
    const std::string& stage() const noexcept { return stage_; }

    /// Same error, re-tagged with the pipeline stage it escaped from.
    Error with_stage(std::string stage) const
    {
        return Error(code_, detail_, std::move(stage));
    }

private:
    static std::string format(Errc code, const std::string& detail,
                              const std::string& stage)
    {
        std::string msg;
        if (!stage.empty())
        {
            msg += "[" + stage + "] ";
        }
        msg += to_string(code);
        if (!detail.empty())
        {
            msg += ": " + detail;
        }
        return msg;
    }

    Errc code_;
    std::string detail_;
    std::string stage_;
};

} // namespace spikesr

#endif // SPIKESR_ERROR_HPP
