class Maximum {
    
    /*@
    @ requires a >= 0 && b >= 0;
    @ ensures \result == a || \result == b;
    @ ensures \result >= a && \result >= b;
    @*/
    public static int maximum(int a, int b) {
        return a > b? a : b;
    }
}
