#pragma once

// Convenience umbrella: the whole toolkit in dependency order.

#include "version.hpp"
#include "errors.hpp"
#include "numeric.hpp"
#include "linalg.hpp"
#include "optim.hpp"
#include "fid.hpp"
#include "jcamp.hpp"
#include "fid_json.hpp"
#include "transform.hpp"
#include "phase.hpp"
#include "baseline.hpp"
#include "peaks.hpp"
#include "multiplet.hpp"
#include "annotate.hpp"
#include "nmr_text.hpp"
#include "annotate_json.hpp"
#include "molecule.hpp"
#include "molecule_json.hpp"
#include "signals.hpp"
#include "database.hpp"
#include "repair.hpp"
#include "hungarian.hpp"
#include "assign.hpp"
#include "hyperbolic.hpp"
#include "grpo.hpp"
#include "agent.hpp"
#include "agent_json.hpp"
#include "config.hpp"
#include "synth.hpp"
#include "pipeline.hpp"
