class A { void go() {} }

class B { void go() {} }

class S {
    A x;

    void m() {
        B x = new B();
        x.go();
    }

    void n() {
        x.go();
    }
}
