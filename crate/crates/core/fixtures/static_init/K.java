class K {
    static int seed = init();

    static {
        helper();
    }

    {
        helper();
    }

    static int init() { return 1; }

    static void helper() {}
}
