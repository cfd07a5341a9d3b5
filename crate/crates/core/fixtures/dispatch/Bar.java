class A { void method() {}; }
class B extends A {}
class C extends B {}

class Bar {
    void foo(A a) { // Could be A, B, C
      a.method();
    }
}
