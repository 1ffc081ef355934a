#ifndef UFRBF_UFRBF_HPP
#define UFRBF_UFRBF_HPP

#include "ufrbf/assembly.hpp"
#include "ufrbf/convergence.hpp"
#include "ufrbf/diagnostics.hpp"
#include "ufrbf/error.hpp"
#include "ufrbf/geometry.hpp"
#include "ufrbf/io.hpp"
#include "ufrbf/manufactured.hpp"
#include "ufrbf/pipeline.hpp"
#include "ufrbf/pointsets.hpp"
#include "ufrbf/solver.hpp"
#include "ufrbf/spatial_index.hpp"
#include "ufrbf/stencil.hpp"
#include "ufrbf/types.hpp"

#endif // UFRBF_UFRBF_HPP
