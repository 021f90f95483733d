// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_HYPERCONE_HPP
#define HYPERCONE_HYPERCONE_HPP

#include "hypercone/decompose.hpp"
#include "hypercone/dyadic.hpp"
#include "hypercone/error.hpp"
#include "hypercone/extension.hpp"
#include "hypercone/gridset.hpp"
#include "hypercone/harness.hpp"
#include "hypercone/majorant.hpp"
#include "hypercone/params.hpp"
#include "hypercone/report.hpp"

#endif
