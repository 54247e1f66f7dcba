#include "rfl/parser.hpp"

namespace rfl {

namespace {

// Proof combinators. Each comparison operator gets a binary step form
// (the right-hand side must already satisfy the relation) and a ternary
// form taking an explicit proof, normally applied with `?`.
const char* kPreludeSource = R"(
let (=.)  :: x:a -> y:{v:a | x = v} -> {v:a | v = x} ;
  (=.) x y = x ;
let (/=.) :: x:a -> y:{v:a | x /= v} -> {v:a | v = x} ;
  (/=.) x y = x ;
let (<=.) :: x:Int -> y:{v:Int | x <= v} -> {v:Int | v = x} ;
  (<=.) x y = x ;
let (<.)  :: x:Int -> y:{v:Int | x < v} -> {v:Int | v = x} ;
  (<.) x y = x ;
let (>=.) :: x:Int -> y:{v:Int | x >= v} -> {v:Int | v = x} ;
  (>=.) x y = x ;
let (>.)  :: x:Int -> y:{v:Int | x > v} -> {v:Int | v = x} ;
  (>.) x y = x ;

let (=?)  :: x:a -> y:a -> p:{ x = y } -> {v:a | v = x} ;
  (=?) x y p = x ;
let (/=?) :: x:a -> y:a -> p:{ x /= y } -> {v:a | v = x} ;
  (/=?) x y p = x ;
let (<=?) :: x:Int -> y:Int -> p:{ x <= y } -> {v:Int | v = x} ;
  (<=?) x y p = x ;
let (<?)  :: x:Int -> y:Int -> p:{ x < y } -> {v:Int | v = x} ;
  (<?) x y p = x ;
let (>=?) :: x:Int -> y:Int -> p:{ x >= y } -> {v:Int | v = x} ;
  (>=?) x y p = x ;
let (>?)  :: x:Int -> y:Int -> p:{ x > y } -> {v:Int | v = x} ;
  (>?) x y p = x ;

let (?) :: f:(p -> a) -> x:p -> a ;
  (?) f x = f x ;

let (**) :: x:a -> q:Unit -> Unit ;
  (**) x q = () ;
let QED :: Unit ;
  QED = () ;
let trivial :: Unit ;
  trivial = () ;

assume (=*) :: f:(a -> b) -> g:(a -> b) -> p:(x:a -> { f x = g x }) -> { f = g } ;
)";

}  // namespace

const std::string& preludeSource() {
  static const std::string src = kPreludeSource;
  return src;
}

const Program& loadPrelude() {
  static const Program prelude = parseProgram(preludeSource());
  return prelude;
}

}  // namespace rfl
