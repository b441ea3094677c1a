#pragma once

#include "hcb/basis.hpp"
#include "hcb/circuit.hpp"
#include "hcb/common.hpp"
#include "hcb/drive.hpp"
#include "hcb/hamiltonian.hpp"
#include "hcb/krylov.hpp"
#include "hcb/lattice.hpp"
#include "hcb/observables.hpp"
#include "hcb/planner.hpp"
#include "hcb/spectra.hpp"
#include "hcb/sparse.hpp"
