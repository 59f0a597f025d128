#pragma once

#include "crnric/rational.hpp"
#include "crnric/lp.hpp"
#include "crnric/core.hpp"
#include "crnric/io.hpp"
#include "crnric/reach.hpp"
#include "crnric/analysis.hpp"
#include "crnric/pwl.hpp"
#include "crnric/compiler.hpp"
#include "crnric/dynamics.hpp"
#include "crnric/harness.hpp"
