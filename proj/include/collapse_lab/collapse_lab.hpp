#pragma once

// Umbrella header for the collapse-lab library: lattice wavefunctions,
// split-step Schrodinger propagation, GRW jump and CSL diffusion processes,
// the matter-density field, Bohmian guidance, and the analysis toolkit.

#include "collapse_lab/analysis.hpp"
#include "collapse_lab/bohm.hpp"
#include "collapse_lab/csl.hpp"
#include "collapse_lab/errors.hpp"
#include "collapse_lab/grid.hpp"
#include "collapse_lab/grw.hpp"
#include "collapse_lab/hamiltonian.hpp"
#include "collapse_lab/matter_density.hpp"
#include "collapse_lab/observables.hpp"
#include "collapse_lab/regions.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/runner.hpp"
#include "collapse_lab/scenario.hpp"
#include "collapse_lab/split_step.hpp"
#include "collapse_lab/wavefunction.hpp"
