class Bar {
    void bar() {}
}
public class Foo {
    Bar b = new Bar();
    void method1(Bar b) {
      b.bar();
    }
}
