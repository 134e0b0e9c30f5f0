#ifndef SPIKESR_SPIKESR_HPP
#define SPIKESR_SPIKESR_HPP

#include "spikesr/assignment.hpp"
#include "spikesr/dealias.hpp"
#include "spikesr/decimation.hpp"
#include "spikesr/error.hpp"
#include "spikesr/parallel.hpp"
#include "spikesr/pipeline.hpp"
#include "spikesr/signal_model.hpp"
#include "spikesr/spectral_core.hpp"
#include "spikesr/sr_methods.hpp"
#include "spikesr/stats.hpp"

#endif // SPIKESR_SPIKESR_HPP
