#ifndef CTXPARSE_CTXPARSE_HPP
#define CTXPARSE_CTXPARSE_HPP

#include "ctxparse/error.hpp"
#include "ctxparse/sexpr.hpp"
#include "ctxparse/tree.hpp"
#include "ctxparse/corpus.hpp"
#include "ctxparse/transform.hpp"
#include "ctxparse/pattern.hpp"
#include "ctxparse/grammar.hpp"
#include "ctxparse/index.hpp"
#include "ctxparse/parser.hpp"
#include "ctxparse/eval.hpp"

#endif
