class V {
    V() {}
    V(int... sizes) {}
    void log(String msg) {}
    void log(String fmt, Object... args) {}
    void run() {
        log("a");
        log("a", 1);
        log("a", 1, 2);
        new V();
        new V(1, 2, 3);
    }
}
