#pragma once

// Convenience include for the whole library.

#include "criteria.hpp"      // IWYU pragma: export
#include "csv.hpp"           // IWYU pragma: export
#include "dataset.hpp"       // IWYU pragma: export
#include "em.hpp"            // IWYU pragma: export
#include "enumeration.hpp"   // IWYU pragma: export
#include "errors.hpp"        // IWYU pragma: export
#include "kmeans.hpp"        // IWYU pragma: export
#include "linalg.hpp"        // IWYU pragma: export
#include "monte_carlo.hpp"   // IWYU pragma: export
#include "partition.hpp"     // IWYU pragma: export
#include "random_swap.hpp"   // IWYU pragma: export
#include "report.hpp"        // IWYU pragma: export
#include "rng.hpp"           // IWYU pragma: export
#include "synthdata.hpp"     // IWYU pragma: export
